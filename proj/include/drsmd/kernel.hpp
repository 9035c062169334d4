#ifndef DRSMD_KERNEL_HPP
#define DRSMD_KERNEL_HPP

#include "drsmd/common.hpp"
#include "drsmd/parallel.hpp"

namespace drsmd {

// Integrating measures for the pairwise weight kappa(u) = int e^{it'u} dmu(t).
// Only the Gaussian CDF measure ships; its Fourier inversion has the closed
// form exp(-||u ./ sigma_t||^2 / 2) and a strictly positive transform, which
// is what the weight construction requires. The enum is the extension point
// for other measures.
enum class KernelMeasure { GaussianCdf };

struct KernelSpec {
    KernelMeasure measure = KernelMeasure::GaussianCdf;
    // Length scale per instrument dimension; a single entry broadcasts.
    Vector sigma_t = Vector::Ones(1);
    bool standardize_instruments = true;

    double sigma_at(Index s) const {
        if (sigma_t.size() == 0) throw spec_error("kernel sigma_t is empty");
        const double v = sigma_t.size() == 1 ? sigma_t[0] : sigma_t[s];
        if (!(v > 0.0)) throw spec_error("kernel sigma_t must be strictly positive");
        return v;
    }
};

// kappa(u) = exp(-sum_s (u_s / sigma_s)^2 / 2); equals 1 iff u = 0.
inline double kappa(const Eigen::Ref<const Vector>& u, const KernelSpec& spec) {
    if (!u.allFinite()) throw numeric_error("kappa: non-finite input");
    double q = 0.0;
    for (Index s = 0; s < u.size(); ++s) {
        const double w = u[s] / spec.sigma_at(s);
        q += w * w;
    }
    return std::exp(-0.5 * q);
}

struct KernelMatrix {
    Matrix values;  // n x n, symmetric, unit diagonal, entries in (0, 1]
    KernelSpec spec;

    Index n() const { return values.rows(); }
};

// Center and scale each instrument column to unit variance. Used ahead of the
// kernel when spec.standardize_instruments is on.
inline Matrix standardize_columns(const Matrix& Z) {
    Matrix out = Z;
    for (Index c = 0; c < Z.cols(); ++c) {
        const double m = Z.col(c).mean();
        const double sd = std::sqrt((Z.col(c).array() - m).square().sum() /
                                    static_cast<double>(Z.rows() - 1));
        if (!(sd > 0.0)) {
            throw data_error("instrument column " + std::to_string(c) +
                             " has zero variance; cannot standardize");
        }
        out.col(c) = (Z.col(c).array() - m) / sd;
    }
    return out;
}

inline KernelMatrix kernel_matrix(const Matrix& Z, KernelSpec spec) {
    if (!Z.allFinite()) throw data_error("instruments contain NaN or Inf");
    if (Z.rows() < 2) throw data_error("kernel matrix needs n >= 2");
    if (spec.sigma_t.size() != 1 && spec.sigma_t.size() != Z.cols())
        throw spec_error("kernel sigma_t dimension does not match instruments");
    const Matrix Zu = spec.standardize_instruments ? standardize_columns(Z) : Z;
    const Index n = Zu.rows();
    const Index q = Zu.cols();
    Vector inv_var(q);
    for (Index s = 0; s < q; ++s) {
        const double sig = spec.sigma_at(s);
        inv_var[s] = 1.0 / (sig * sig);
    }

    KernelMatrix K;
    K.spec = spec;
    K.values.resize(n, n);
    Matrix& V = K.values;
    // Pure per-entry computation; row blocks are independent, so the result
    // does not depend on the worker count.
    parallel_blocks(static_cast<std::size_t>(n), 128, [&](std::size_t, std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            const Index jj = static_cast<Index>(j);
            V(jj, jj) = 1.0;
            for (Index l = 0; l < jj; ++l) {
                double qd = 0.0;
                for (Index s = 0; s < q; ++s) {
                    const double d = Zu(jj, s) - Zu(l, s);
                    qd += d * d * inv_var[s];
                }
                const double v = std::exp(-0.5 * qd);
                V(jj, l) = v;
                V(l, jj) = v;
            }
        }
    });
    return K;
}

// One kernel row computed on the fly; lets O(n^2) passes run without
// materializing the full matrix at large n.
inline void kernel_row(const Matrix& Zu, Index j, const Vector& inv_var, Vector& out) {
    const Index n = Zu.rows();
    const Index q = Zu.cols();
    out.resize(n);
    for (Index l = 0; l < n; ++l) {
        double qd = 0.0;
        for (Index s = 0; s < q; ++s) {
            const double d = Zu(j, s) - Zu(l, s);
            qd += d * d * inv_var[s];
        }
        out[l] = std::exp(-0.5 * qd);
    }
}

}  // namespace drsmd

#endif  // DRSMD_KERNEL_HPP
