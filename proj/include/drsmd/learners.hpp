#ifndef DRSMD_LEARNERS_HPP
#define DRSMD_LEARNERS_HPP

#include "drsmd/common.hpp"
#include "drsmd/rng.hpp"

#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace drsmd {

enum class LearnerKind { LassoCv, NadarayaWatson };
enum class BandwidthRule { RuleOfThumb, Fixed };

struct LearnerConfig {
    LearnerKind kind = LearnerKind::LassoCv;

    // Lasso
    int max_degree = 5;
    int folds = 5;
    int lambda_grid_size = 100;
    double lambda_min_ratio = 1e-4;

    // Nadaraya-Watson
    BandwidthRule bandwidth_rule = BandwidthRule::RuleOfThumb;
    Vector fixed_bandwidth;

    std::uint64_t seed = 0;   // CV fold assignment
    bool cross_fit = false;   // optional 2-fold cross-fitting in the pipeline

    void check() const {
        if (max_degree < 1) throw spec_error("learner max_degree must be >= 1");
        if (folds < 2) throw spec_error("learner folds must be >= 2");
        if (bandwidth_rule == BandwidthRule::Fixed) {
            if (fixed_bandwidth.size() == 0 || (fixed_bandwidth.array() <= 0.0).any())
                throw spec_error("fixed bandwidths must be strictly positive");
        }
    }
};

// Per-covariate powers X_q, X_q^2, ..., X_q^d in covariate-major order; no
// cross terms.
inline Matrix poly_features(const Matrix& X, int max_degree) {
    if (max_degree < 1) throw spec_error("poly_features: max_degree must be >= 1");
    const Index n = X.rows();
    const Index q = X.cols();
    Matrix F(n, q * max_degree);
    for (Index c = 0; c < q; ++c) {
        Vector v = X.col(c);
        for (int d = 1; d <= max_degree; ++d) {
            F.col(c * max_degree + (d - 1)) = v;
            if (d < max_degree) v = v.cwiseProduct(X.col(c));
        }
        if (!F.middleCols(c * max_degree, max_degree).allFinite()) {
            throw numeric_error("polynomial expansion overflowed for covariate column " +
                                std::to_string(c));
        }
    }
    return F;
}

struct FittedLearner {
    Vector fitted;  // in-sample fitted values; leave-one-out for NW
    std::function<Vector(const Matrix&)> predict;
    std::vector<std::string> warnings;

    // selection metadata
    double lambda = std::numeric_limits<double>::quiet_NaN();
    int support_size = 0;
    Vector bandwidths;
    Vector cv_errors;   // mean CV MSE per grid lambda (Lasso only)
    Vector lambda_grid;
};

namespace detail {

struct StandardizedDesign {
    Matrix F;              // centered/scaled columns, constant columns removed
    std::vector<Index> keep;
    Vector mean;           // per kept column
    Vector scale;          // per kept column (population sd)
};

inline StandardizedDesign standardize_design(const Matrix& Fraw) {
    const Index n = Fraw.rows();
    StandardizedDesign s;
    std::vector<double> means, scales;
    for (Index c = 0; c < Fraw.cols(); ++c) {
        const double m = Fraw.col(c).mean();
        const double var = (Fraw.col(c).array() - m).square().sum() / static_cast<double>(n);
        if (var <= 0.0) continue;  // constant column
        s.keep.push_back(c);
        means.push_back(m);
        scales.push_back(std::sqrt(var));
    }
    const Index m = static_cast<Index>(s.keep.size());
    s.F.resize(n, m);
    s.mean.resize(m);
    s.scale.resize(m);
    for (Index k = 0; k < m; ++k) {
        s.mean[k] = means[static_cast<std::size_t>(k)];
        s.scale[k] = scales[static_cast<std::size_t>(k)];
        s.F.col(k) = (Fraw.col(s.keep[static_cast<std::size_t>(k)]).array() - s.mean[k]) / s.scale[k];
    }
    return s;
}

// Coordinate descent on standardized features via the Gram matrix:
// minimize (1/2n)||y_c - F beta||^2 + lambda ||beta||_1 with unit-diagonal
// G = F'F/n and c = F'y_c/n. Warm-started along a descending lambda path.
inline void lasso_coordinate_descent(const Matrix& G, const Vector& c, double lambda,
                                     Vector& beta, double tol = 1e-7, int max_sweeps = 100000) {
    const Index m = c.size();
    Vector Gb = G * beta;  // running G*beta
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double max_change = 0.0;
        for (Index j = 0; j < m; ++j) {
            const double bj = beta[j];
            const double rho = c[j] - (Gb[j] - bj);  // G_jj = 1
            const double bn = (rho > lambda) ? rho - lambda : (rho < -lambda ? rho + lambda : 0.0);
            if (bn != bj) {
                Gb += G.col(j) * (bn - bj);
                beta[j] = bn;
                max_change = std::max(max_change, std::abs(bn - bj));
            }
        }
        if (max_change < tol) return;
    }
}

inline Vector lambda_path(double lambda_max, int grid, double min_ratio) {
    Vector path(grid);
    if (grid == 1) {
        path[0] = lambda_max;
        return path;
    }
    const double l0 = std::log(lambda_max);
    const double l1 = std::log(lambda_max * min_ratio);
    for (int i = 0; i < grid; ++i)
        path[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(grid - 1));
    return path;
}

}  // namespace detail

// Model on the original feature scale: yhat = intercept + F * beta.
struct LassoModel {
    double intercept = 0.0;
    Vector beta;
    double lambda = 0.0;
    int support_size = 0;
};

// Full-data fit at one penalty level (no CV).
inline LassoModel lasso_fit_at(const Matrix& Fraw, const Vector& y, double lambda,
                               double tol = 1e-7) {
    if (!y.allFinite()) throw data_error("lasso: target contains NaN or Inf");
    const Index n = y.size();
    auto s = detail::standardize_design(Fraw);
    LassoModel model;
    model.lambda = lambda;
    model.beta = Vector::Zero(Fraw.cols());
    const double ybar = y.mean();
    if (s.keep.empty()) {
        model.intercept = ybar;
        return model;
    }
    const Matrix G = (s.F.transpose() * s.F) / static_cast<double>(n);
    const Vector c = (s.F.transpose() * (y.array() - ybar).matrix()) / static_cast<double>(n);
    Vector beta_s = Vector::Zero(c.size());
    detail::lasso_coordinate_descent(G, c, lambda, beta_s, tol);
    double icpt = ybar;
    for (Index k = 0; k < beta_s.size(); ++k) {
        const double b = beta_s[k] / s.scale[k];
        model.beta[s.keep[static_cast<std::size_t>(k)]] = b;
        icpt -= b * s.mean[k];
        if (beta_s[k] != 0.0) ++model.support_size;
    }
    model.intercept = icpt;
    return model;
}

// K-fold cross-validated Lasso. The grid is 100 log-spaced penalties from
// lambda_max (smallest all-zero penalty) down to 1e-4 * lambda_max; ties in CV
// error break toward the larger penalty. Fold assignment comes from cfg.seed.
inline FittedLearner lasso_cv_fit(const Matrix& Fraw, const Vector& y, const LearnerConfig& cfg) {
    cfg.check();
    if (!y.allFinite()) throw data_error("lasso: target contains NaN or Inf");
    const Index n = y.size();
    if (Fraw.rows() != n) throw data_error("lasso: feature/target length mismatch");
    if (n < cfg.folds) throw data_error("lasso: need n >= folds");

    FittedLearner out;
    auto s = detail::standardize_design(Fraw);
    const double ybar = y.mean();
    const Vector yc = y.array() - ybar;

    if (s.keep.empty()) {
        out.warnings.push_back("all features constant; fitting intercept only");
        out.fitted = Vector::Constant(n, ybar);
        out.lambda = 0.0;
        out.support_size = 0;
        out.predict = [ybar](const Matrix& Fnew) { return Vector::Constant(Fnew.rows(), ybar); };
        return out;
    }
    if (static_cast<std::size_t>(s.keep.size()) < static_cast<std::size_t>(Fraw.cols()))
        out.warnings.push_back("constant feature columns dropped");

    const Index m = static_cast<Index>(s.keep.size());
    const double nf = static_cast<double>(n);
    const Vector c_full = (s.F.transpose() * yc) / nf;
    const double lambda_max = c_full.cwiseAbs().maxCoeff();

    if (!(lambda_max > 0.0)) {
        // Target orthogonal to every feature: any penalty gives the zero fit.
        out.fitted = Vector::Constant(n, ybar);
        out.lambda = 0.0;
        out.support_size = 0;
        out.predict = [ybar](const Matrix& Fnew) { return Vector::Constant(Fnew.rows(), ybar); };
        return out;
    }

    const Vector path = detail::lambda_path(lambda_max, cfg.lambda_grid_size, cfg.lambda_min_ratio);

    // Fold assignment by seeded permutation, cut into contiguous chunks.
    std::vector<Index> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), Index{0});
    RngStream rng(cfg.seed ^ 0x5cf5u);
    rng.shuffle(perm);
    std::vector<int> fold_of(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        const int f = static_cast<int>((static_cast<std::uint64_t>(i) *
                                        static_cast<std::uint64_t>(cfg.folds)) /
                                       static_cast<std::uint64_t>(n));
        fold_of[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = f;
    }

    Vector cv_sse = Vector::Zero(path.size());
    for (int f = 0; f < cfg.folds; ++f) {
        std::vector<Index> tr, va;
        for (Index i = 0; i < n; ++i) (fold_of[static_cast<std::size_t>(i)] == f ? va : tr).push_back(i);
        if (va.empty() || tr.size() < 2) continue;
        Matrix Ft(static_cast<Index>(tr.size()), m);
        Vector yt(static_cast<Index>(tr.size()));
        for (std::size_t r = 0; r < tr.size(); ++r) {
            Ft.row(static_cast<Index>(r)) = s.F.row(tr[r]);
            yt[static_cast<Index>(r)] = yc[tr[r]];
        }
        const double nt = static_cast<double>(tr.size());
        const double ytbar = yt.mean();
        Vector ytc = yt.array() - ytbar;
        const Matrix Gt = (Ft.transpose() * Ft) / nt - (Ft.colwise().mean().transpose() *
                                                        Ft.colwise().mean());
        const Vector ct = (Ft.transpose() * ytc) / nt -
                          Ft.colwise().mean().transpose() * 0.0;  // ytc already centered
        // Rescale to unit diagonal within the fold.
        Vector dscale(m);
        for (Index k = 0; k < m; ++k) dscale[k] = std::sqrt(std::max(Gt(k, k), 1e-12));
        Matrix Gs = Gt;
        Vector cs = ct;
        for (Index a = 0; a < m; ++a) {
            cs[a] /= dscale[a];
            for (Index b = 0; b < m; ++b) Gs(a, b) /= dscale[a] * dscale[b];
        }
        Vector beta = Vector::Zero(m);
        for (Index li = 0; li < path.size(); ++li) {
            detail::lasso_coordinate_descent(Gs, cs, path[li], beta);
            // Validation error at this lambda.
            for (Index vi : va) {
                double pred = ytbar;
                for (Index k = 0; k < m; ++k) {
                    if (beta[k] == 0.0) continue;
                    pred += beta[k] / dscale[k] * (s.F(vi, k) - Ft.col(k).mean());
                }
                const double e = yc[vi] - pred;
                cv_sse[li] += e * e;
            }
        }
    }

    // Descending grid: the first minimum is the largest (sparsest) penalty.
    Index best = 0;
    for (Index li = 1; li < path.size(); ++li)
        if (cv_sse[li] < cv_sse[best]) best = li;

    // Final fit on the full data, warm-started down the path to the winner.
    const Matrix G = (s.F.transpose() * s.F) / nf;
    Vector beta = Vector::Zero(m);
    for (Index li = 0; li <= best; ++li) detail::lasso_coordinate_descent(G, c_full, path[li], beta);

    LassoModel model;
    model.lambda = path[best];
    model.beta = Vector::Zero(Fraw.cols());
    double icpt = ybar;
    for (Index k = 0; k < m; ++k) {
        const double b = beta[k] / s.scale[k];
        model.beta[s.keep[static_cast<std::size_t>(k)]] = b;
        icpt -= b * s.mean[k];
        if (beta[k] != 0.0) ++model.support_size;
    }
    model.intercept = icpt;

    out.fitted = (Fraw * model.beta).array() + model.intercept;
    out.lambda = model.lambda;
    out.support_size = model.support_size;
    out.cv_errors = cv_sse / nf;
    out.lambda_grid = path;
    out.predict = [model](const Matrix& Fnew) -> Vector {
        return (Fnew * model.beta).array() + model.intercept;
    };
    return out;
}

// Leave-one-out Nadaraya-Watson with a product Gaussian smoothing kernel.
// RuleOfThumb sets h_s = sd(X_s) * n^{-0.2} per dimension.
inline FittedLearner nw_fit(const Matrix& X, const Vector& y, const LearnerConfig& cfg) {
    cfg.check();
    if (!y.allFinite()) throw data_error("nw: target contains NaN or Inf");
    const Index n = y.size();
    if (X.rows() != n) throw data_error("nw: feature/target length mismatch");

    FittedLearner out;
    if (X.cols() > 3)
        out.warnings.push_back("Nadaraya-Watson with more than 3 covariates; consider the Lasso learner");

    Vector h(X.cols());
    if (cfg.bandwidth_rule == BandwidthRule::Fixed) {
        if (cfg.fixed_bandwidth.size() != X.cols())
            throw spec_error("fixed bandwidth dimension does not match covariates");
        h = cfg.fixed_bandwidth;
    } else {
        const double rate = std::pow(static_cast<double>(n), -0.2);
        for (Index s = 0; s < X.cols(); ++s) h[s] = sample_sd(X.col(s)) * rate;
    }
    if ((h.array() <= 0.0).any()) throw spec_error("nw: zero bandwidth");
    out.bandwidths = h;

    const double ybar = y.mean();
    bool fell_back = false;
    out.fitted.resize(n);
    for (Index i = 0; i < n; ++i) {
        double num = 0.0, den = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (j == i) continue;
            double q = 0.0;
            for (Index s = 0; s < X.cols(); ++s) {
                const double d = (X(i, s) - X(j, s)) / h[s];
                q += d * d;
            }
            const double w = std::exp(-0.5 * q);
            num += w * y[j];
            den += w;
        }
        if (den <= std::numeric_limits<double>::min()) {
            out.fitted[i] = ybar;
            fell_back = true;
        } else {
            out.fitted[i] = num / den;
        }
    }
    if (fell_back)
        out.warnings.push_back("empty effective neighborhood for some rows; used global mean");

    Matrix Xtr = X;
    Vector ytr = y;
    out.predict = [Xtr, ytr, h, ybar](const Matrix& Xnew) -> Vector {
        Vector pred(Xnew.rows());
        for (Index i = 0; i < Xnew.rows(); ++i) {
            double num = 0.0, den = 0.0;
            for (Index j = 0; j < Xtr.rows(); ++j) {
                double q = 0.0;
                for (Index s = 0; s < Xtr.cols(); ++s) {
                    const double d = (Xnew(i, s) - Xtr(j, s)) / h[s];
                    q += d * d;
                }
                const double w = std::exp(-0.5 * q);
                num += w * ytr[j];
                den += w;
            }
            pred[i] = den <= std::numeric_limits<double>::min() ? ybar : num / den;
        }
        return pred;
    };
    return out;
}

}  // namespace drsmd

#endif  // DRSMD_LEARNERS_HPP
