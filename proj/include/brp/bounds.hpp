#pragma once

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "brp/approx.hpp"
#include "brp/errors.hpp"
#include "brp/matrix.hpp"
#include "brp/random.hpp"

namespace brp {

// Carrier for everything the bound formulas consume: the spectrum split at
// rank r, the oversampling and power counts, the deviation parameters, and
// (for the per-draw bounds) the drawn projection with the matching right
// singular vectors.
struct BoundInputs {
    Vector spectrum;  // descending, nonnegative
    Index r = 1;
    Index p = 0;
    Index q = 0;
    double u = 1.0;
    double t = 1.0;
    std::optional<DenseMatrix> a1;
    std::optional<DenseMatrix> v;
};

struct DeviationBound {
    double value = 0.0;
    double fail_prob = 0.0;
};

// What a Monte-Carlo run reports: each bound is present only when its
// hypotheses hold for the given configuration.  `deterministic` is the
// smallest per-draw bound over the trials; the per-draw values themselves
// are kept for dominance checks.
struct BoundReport {
    std::optional<double> deterministic;
    std::optional<double> average;
    std::optional<double> deviation_value;
    std::optional<double> deviation_fail_prob;
    std::vector<double> observed_errors;
    std::vector<double> deterministic_draws;
    double observed_mean = 0.0;
    double observed_max = 0.0;
    Index deterministic_violations = 0;
    Index deviation_exceedances = 0;
};

namespace detail {

inline void check_spectrum(const Vector& s, Index r) {
    const Index n = s.size();
    if (n < 1) throw config_error("bounds: empty spectrum");
    if (r < 1 || r > n)
        throw config_error("bounds: rank " + std::to_string(r) +
                           " out of range for spectrum of length " +
                           std::to_string(n));
    for (Index i = 0; i < n; ++i) {
        if (!(s(i) >= 0.0))
            throw config_error("bounds: spectrum must be nonnegative and finite");
        if (i > 0 && s(i) > s(i - 1))
            throw config_error("bounds: spectrum must be non-increasing");
    }
}

inline void require_positive_gap(const Vector& s, Index r, const char* who) {
    if (s(r - 1) <= 0.0)
        throw degenerate_spectrum_error(std::string(who) +
                                        ": lambda_r is zero; the bound divides by it");
}

} // namespace detail

/// Per-draw bound for the power scheme: with e = 2q+1 and the spectrum split
/// as (lambda_1..lambda_r | rest), returns
/// ( ||L2^{2e} (V2' a1) (V1' a1)^+ L1^{-e}||_2^2 + lambda_{r+1}^{2e} )^{1/(2e)}.
/// a1 must be the standard Gaussian block the sketch drew first; the
/// correlated updates are already folded into the bound's derivation, so
/// passing the updated projection evaluates a smaller expression that the
/// observed error can exceed.
inline double power_deterministic_bound(const SvdFactors& svd, const DenseMatrix& a1,
                                        Index r, Index q) {
    const Vector& s = svd.sigma;
    const Index n = s.size();
    detail::check_spectrum(s, r);
    if (r >= n)
        throw config_error("deterministic bound: rank must be below the "
                           "spectrum length " + std::to_string(n));
    if (q < 0) throw config_error("deterministic bound: q must be >= 0");
    detail::require_positive_gap(s, r, "deterministic bound");
    if (svd.v.rows() != a1.rows() || svd.v.cols() != n)
        throw shape_error("deterministic bound: projection " + detail::shape_of(a1) +
                          " does not match singular vectors " + detail::shape_of(svd.v));
    const int e = static_cast<int>(2 * q + 1);
    const DenseMatrix g1 = svd.v.leftCols(r).transpose() * a1;        // r x k
    const DenseMatrix g2 = svd.v.rightCols(n - r).transpose() * a1;   // (n-r) x k
    Vector head_inv(r), tail_pow(n - r);
    for (Index i = 0; i < r; ++i) head_inv(i) = std::pow(s(i), -e);
    for (Index i = 0; i < n - r; ++i) tail_pow(i) = std::pow(s(r + i), 2 * e);
    const DenseMatrix core =
        tail_pow.asDiagonal() * g2 * pinv(g1) * head_inv.asDiagonal();
    const double term1 = spectral_norm(core);
    const double term2 = std::pow(s(r), e);
    return std::pow(term1 * term1 + term2 * term2, 1.0 / (2.0 * e));
}

/// Per-draw bound without the power scheme:
/// sqrt( ||L2^2 (V2' a1) (V1' a1)^+ L1^{-1}||_2^2 + lambda_{r+1}^2 ).
inline double deterministic_bound(const SvdFactors& svd, const DenseMatrix& a1,
                                  Index r) {
    return power_deterministic_bound(svd, a1, r, 0);
}

/// Expected-error bound:
/// (sqrt( (1/(p-1)) sum_{i<=r} lambda_{r+1}^2/lambda_i^2 ) + 1) lambda_{r+1}
///   + (e sqrt(r+p)/p) sqrt( sum_{i>r} lambda_i^2 / lambda_r^2 ).
inline double average_bound(const Vector& spectrum, Index r, Index p) {
    detail::check_spectrum(spectrum, r);
    if (p < 2)
        throw hypothesis_error("average bound: needs oversampling p >= 2, got " +
                               std::to_string(p));
    detail::require_positive_gap(spectrum, r, "average bound");
    const Index n = spectrum.size();
    const double lr = spectrum(r - 1);
    const double lr1 = (r < n) ? spectrum(r) : 0.0;
    double head = 0.0;
    for (Index i = 0; i < r; ++i) head += (lr1 * lr1) / (spectrum(i) * spectrum(i));
    double tail = 0.0;
    for (Index i = r; i < n; ++i) tail += spectrum(i) * spectrum(i);
    const double term1 = (std::sqrt(head / (p - 1)) + 1.0) * lr1;
    const double term2 =
        std::numbers::e * std::sqrt(double(r + p)) / double(p) * std::sqrt(tail) / lr;
    return term1 + term2;
}

/// Expected-error bound under the power scheme: the same expression with
/// every singular value raised to 2q+1, then the (2q+1)-th root of the whole.
inline double power_average_bound(const Vector& spectrum, Index r, Index p, Index q) {
    if (q < 0) throw config_error("average bound: q must be >= 0");
    if (q == 0) return average_bound(spectrum, r, p);
    const int e = static_cast<int>(2 * q + 1);
    detail::check_spectrum(spectrum, r);
    Vector powered(spectrum.size());
    for (Index i = 0; i < spectrum.size(); ++i) powered(i) = std::pow(spectrum(i), e);
    return std::pow(average_bound(powered, r, p), 1.0 / e);
}

/// High-probability bound: the error stays below `value` except with
/// probability e^{-u^2/2} + 4 t^{-p} + t^{-(p+1)} (reported even when > 1).
inline DeviationBound deviation_bound(const Vector& spectrum, Index r, Index p,
                                      double u, double t) {
    detail::check_spectrum(spectrum, r);
    if (p < 4)
        throw hypothesis_error("deviation bound: needs oversampling p >= 4, got " +
                               std::to_string(p));
    if (!(u >= 1.0) || !(t >= 1.0))
        throw hypothesis_error("deviation bound: needs u >= 1 and t >= 1");
    detail::require_positive_gap(spectrum, r, "deviation bound");
    const Index n = spectrum.size();
    const double lr = spectrum(r - 1);
    const double lr1 = (r < n) ? spectrum(r) : 0.0;
    double head_inv = 0.0;
    for (Index i = 0; i < r; ++i) head_inv += 1.0 / spectrum(i);
    double tail2 = 0.0;
    for (Index i = r; i < n; ++i) tail2 += spectrum(i) * spectrum(i);
    const double c = std::numbers::e * std::sqrt(double(r + p)) / double(p + 1);
    DeviationBound out;
    out.value = (1.0 + t * std::sqrt(12.0 * double(r) / double(p)) * std::sqrt(head_inv) +
                 c * t * u / lr) *
                    (lr1 * lr1) +
                c * t * std::sqrt(tail2) / lr;
    out.fail_prob = std::exp(-u * u / 2.0) + 4.0 * std::pow(t, -double(p)) +
                    std::pow(t, -double(p + 1));
    return out;
}

/// Matrix with a prescribed spectrum: U diag(lambda) V' with U and V
/// orthonormal bases of seeded Gaussian blocks.  The bounds depend only on
/// the spectrum, so this is the canonical test family.
inline DenseMatrix synthesize_with_spectrum(const Vector& spectrum, Index rows,
                                            Index cols, RandomSeed seed) {
    const Index k = spectrum.size();
    detail::check_spectrum(spectrum, 1);
    if (k > std::min(rows, cols))
        throw config_error("synthesize_with_spectrum: spectrum of length " +
                           std::to_string(k) + " does not fit a " +
                           std::to_string(rows) + "x" + std::to_string(cols) +
                           " matrix");
    const DenseMatrix u = thin_qr(gaussian_matrix(rows, k, derive(seed, 0))).first;
    const DenseMatrix v = thin_qr(gaussian_matrix(cols, k, derive(seed, 1))).first;
    DenseMatrix out = u * spectrum.asDiagonal() * v.transpose();
    return out;
}

/// SVD of an arbitrary dense matrix, transposing internally so the wide case
/// is handled; v always has one column per singular value.
inline SvdFactors oriented_svd(const DenseMatrix& x) {
    if (x.rows() >= x.cols()) return svd_full(x);
    SvdFactors ft = svd_full(transpose(x));
    return {ft.v, ft.sigma, ft.u};
}

/// Run the sketch-and-approximate pipeline `trials` times with seeds derived
/// from cfg.seed, record the spectral error of every draw, and evaluate each
/// bound whose hypotheses the configuration satisfies.  The per-draw bound is
/// evaluated only under the correlated scheme (whose updates its derivation
/// assumes), at the initial Gaussian block of each trial.  Trials may run on
/// `threads` workers; the report is identical for any thread count because
/// seeds are per-trial.
inline BoundReport monte_carlo_check(const DenseMatrix& x, const SketchConfig& cfg,
                                     Index trials, double u = 1.0, double t = 1.0,
                                     const ApproxOptions& opts = {},
                                     int threads = 0) {
    if (trials < 1)
        throw config_error("monte_carlo_check: trials must be >= 1");
    const DenseOperator op{x};
    detail::validate_config(op, cfg);
    const SvdFactors f = oriented_svd(x);
    const Vector& s = f.sigma;
    const Index n = s.size();
    const Index r = cfg.rank;
    const Index p = cfg.oversample;

    BoundReport rep;
    const bool gap = s(r - 1) > 0.0;
    if (p >= 2 && gap) rep.average = power_average_bound(s, r, p, cfg.power_q);
    if (p >= 4 && gap) {
        const DeviationBound dev = deviation_bound(s, r, p, u, t);
        rep.deviation_value = dev.value;
        rep.deviation_fail_prob = dev.fail_prob;
    }
    const bool per_draw = cfg.scheme == Scheme::correlated && r < n && gap;

    std::vector<double> errs(static_cast<std::size_t>(trials), 0.0);
    std::vector<double> dets;
    if (per_draw) dets.assign(static_cast<std::size_t>(trials), 0.0);

    auto run_trial = [&](Index i) {
        SketchConfig tc = cfg;
        tc.seed = derive(cfg.seed, static_cast<std::uint64_t>(i));
        const BilateralSketch sk = power_sketch(op, tc);
        const LowRankFactors lr = power_approximate(op, tc, sk, opts);
        DenseMatrix residual = x - materialize(lr);
        errs[static_cast<std::size_t>(i)] = spectral_norm(residual);
        if (per_draw) {
            // The correlated sketch overwrote a1 with the updated projection;
            // the bound takes the standard Gaussian block, so redraw it.
            const DenseMatrix a1_initial =
                gaussian_matrix(x.cols(), cfg.width(), derive(tc.seed, 0));
            dets[static_cast<std::size_t>(i)] =
                power_deterministic_bound(f, a1_initial, r, cfg.power_q);
        }
    };

    const int workers = std::max(0, threads);
    if (workers <= 1 || trials == 1) {
        for (Index i = 0; i < trials; ++i) run_trial(i);
    } else {
        const int pool = static_cast<int>(
            std::min<Index>(trials, static_cast<Index>(workers)));
        std::vector<std::exception_ptr> failures(static_cast<std::size_t>(pool));
        std::vector<std::thread> crew;
        crew.reserve(static_cast<std::size_t>(pool));
        for (int w = 0; w < pool; ++w) {
            crew.emplace_back([&, w] {
                try {
                    for (Index i = w; i < trials; i += pool) run_trial(i);
                } catch (...) {
                    failures[static_cast<std::size_t>(w)] = std::current_exception();
                }
            });
        }
        for (auto& th : crew) th.join();
        for (const auto& ep : failures)
            if (ep) std::rethrow_exception(ep);
    }

    rep.observed_errors = errs;
    double sum = 0.0, worst = 0.0;
    for (double e : errs) {
        sum += e;
        worst = std::max(worst, e);
    }
    rep.observed_mean = sum / static_cast<double>(trials);
    rep.observed_max = worst;
    if (per_draw) {
        rep.deterministic_draws = dets;
        double lowest = dets[0];
        Index bad = 0;
        for (Index i = 0; i < trials; ++i) {
            lowest = std::min(lowest, dets[static_cast<std::size_t>(i)]);
            if (errs[static_cast<std::size_t>(i)] > dets[static_cast<std::size_t>(i)])
                ++bad;
        }
        rep.deterministic = lowest;
        rep.deterministic_violations = bad;
    }
    if (rep.deviation_value) {
        Index over = 0;
        for (double e : errs)
            if (e > *rep.deviation_value) ++over;
        rep.deviation_exceedances = over;
    }
    return rep;
}

} // namespace brp
