#ifndef DRSMD_RNG_HPP
#define DRSMD_RNG_HPP

#include <cmath>
#include <cstdint>

namespace drsmd {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with Box-Muller normals. All draws are a pure function of the
// seed, so per-replication substreams are reproducible no matter which worker
// thread executes them.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64(sm);
    }

    // Substream `index` of a master seed; used for per-replication streams.
    static RngStream substream(std::uint64_t master_seed, std::uint64_t index) {
        std::uint64_t sm = master_seed;
        const std::uint64_t base = splitmix64(sm);
        return RngStream(base ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on (0,1); never returns 0 or 1.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    double bernoulli(double p) { return uniform() < p ? 1.0 : 0.0; }

    // Fisher-Yates over [0, n); used for CV fold assignment.
    template <typename IntVec>
    void shuffle(IntVec& idx) {
        for (std::size_t i = idx.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(next_u64() % i);
            std::swap(idx[i - 1], idx[j]);
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace drsmd

#endif  // DRSMD_RNG_HPP
