#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <string>
#include <utility>

#include "brp/errors.hpp"
#include "brp/matrix.hpp"
#include "brp/random.hpp"

namespace brp {

// How the two projection matrices are drawn: independent Gaussian draws, or
// the correlated update where each side is rebuilt from the other side's
// projection before the final sketch.
enum class Scheme { independent, correlated };

struct SketchConfig {
    Index rank = 1;
    Index oversample = 0;
    Index power_q = 0;
    Scheme scheme = Scheme::correlated;
    RandomSeed seed{};

    Index width() const { return rank + oversample; }
};

// The sketch tuple: a1 (n x k), a2 (m x k), y1 (m x k), y2 (n x k) with
// k = rank + oversample.  Under the correlated scheme the final a1 equals y2
// and a2 equals the intermediate first projection, bit for bit.
struct BilateralSketch {
    DenseMatrix a1;
    DenseMatrix a2;
    DenseMatrix y1;
    DenseMatrix y2;
};

// Low-rank approximation in factored form: L = left * right, never
// materialized unless asked.
struct LowRankFactors {
    DenseMatrix left;   // m x k
    DenseMatrix right;  // k x n
    Index nominal_rank = 0;
};

// Numerical guard rails for the small middle-matrix inversion.
struct ApproxOptions {
    double cond_limit = 1e12;
    bool pinv_fallback = false;
};

// Anything that can act as the data matrix: dense storage, a product of
// factors, or any other structure that can multiply by a block of vectors
// from either side.  Keeps sketching linear in the large dimension when the
// matrix itself is cheap to apply.
template <typename Op>
concept LinearOperator = requires(const Op& op, const DenseMatrix& m) {
    { op.rows() } -> std::convertible_to<Index>;
    { op.cols() } -> std::convertible_to<Index>;
    { op.apply(m) } -> std::convertible_to<DenseMatrix>;            // X * m
    { op.apply_transpose(m) } -> std::convertible_to<DenseMatrix>;  // X' * m
};

// View of a plain dense matrix as a LinearOperator (no copy).
struct DenseOperator {
    const DenseMatrix& x;

    Index rows() const { return x.rows(); }
    Index cols() const { return x.cols(); }
    DenseMatrix apply(const DenseMatrix& m) const {
        DenseMatrix r = x * m;
        detail::require_finite(r, "DenseOperator::apply");
        return r;
    }
    DenseMatrix apply_transpose(const DenseMatrix& m) const {
        DenseMatrix r = x.transpose() * m;
        detail::require_finite(r, "DenseOperator::apply_transpose");
        return r;
    }
};

// X = a * b held in factored form (a: m x r, b: r x n); each apply costs
// O((m + n) r k) instead of O(m n k).
struct ProductOperator {
    const DenseMatrix& a;
    const DenseMatrix& b;

    ProductOperator(const DenseMatrix& a_, const DenseMatrix& b_) : a(a_), b(b_) {
        if (a.cols() != b.rows())
            throw shape_error("ProductOperator: incompatible factors " +
                              detail::shape_of(a) + " times " + detail::shape_of(b));
    }
    Index rows() const { return a.rows(); }
    Index cols() const { return b.cols(); }
    DenseMatrix apply(const DenseMatrix& m) const {
        DenseMatrix r = a * (b * m).eval();
        detail::require_finite(r, "ProductOperator::apply");
        return r;
    }
    DenseMatrix apply_transpose(const DenseMatrix& m) const {
        DenseMatrix r = b.transpose() * (a.transpose() * m).eval();
        detail::require_finite(r, "ProductOperator::apply_transpose");
        return r;
    }
};

namespace detail {

template <LinearOperator Op>
void validate_config(const Op& op, const SketchConfig& cfg) {
    if (cfg.rank < 1)
        throw config_error("sketch: rank must be >= 1, got " +
                           std::to_string(cfg.rank));
    if (cfg.oversample < 0 || cfg.power_q < 0)
        throw config_error("sketch: oversample and power_q must be >= 0");
    const Index k = cfg.width();
    const Index limit = std::min(op.rows(), op.cols());
    if (k > limit)
        throw config_error("sketch: rank + oversample = " + std::to_string(k) +
                           " exceeds min dimension " + std::to_string(limit));
}

// (X X')^q X applied to a block by alternating products; the sharpened
// matrix, whose singular values are those of X raised to 2q+1, is never
// formed.
template <LinearOperator Op>
DenseMatrix apply_sharpened(const Op& op, const DenseMatrix& m, Index q) {
    DenseMatrix v = op.apply(m);
    for (Index i = 0; i < q; ++i) v = op.apply(op.apply_transpose(v));
    return v;
}

template <LinearOperator Op>
DenseMatrix apply_sharpened_transpose(const Op& op, const DenseMatrix& m, Index q) {
    DenseMatrix v = op.apply_transpose(m);
    for (Index i = 0; i < q; ++i) v = op.apply_transpose(op.apply(v));
    return v;
}

// Shared solve for the k x k middle matrix: exact SVD-based inverse under the
// condition limit, pseudo-inverse with cutoff 1e-12 * k when the caller opted
// into the fallback.
inline DenseMatrix invert_middle(const DenseMatrix& mid, const ApproxOptions& opts) {
    try {
        return invert_small(mid, opts.cond_limit);
    } catch (const singular_error&) {
        if (!opts.pinv_fallback) throw;
        return pinv(mid, 1e-12 * static_cast<double>(mid.rows()));
    }
}

} // namespace detail

/// Sketch of the sharpened matrix (X X')^q X.  q = 0 sketches X itself and
/// is bit-identical to bilateral_sketch.
template <LinearOperator Op>
BilateralSketch power_sketch(const Op& op, const SketchConfig& cfg) {
    detail::validate_config(op, cfg);
    const Index k = cfg.width();
    const Index q = cfg.power_q;
    BilateralSketch s;
    if (cfg.scheme == Scheme::correlated) {
        s.a1 = gaussian_matrix(op.cols(), k, derive(cfg.seed, 0));
        s.y1 = detail::apply_sharpened(op, s.a1, q);
        s.a2 = s.y1;
        s.y2 = detail::apply_sharpened_transpose(op, s.a2, q);
        s.a1 = s.y2;
        s.y1 = detail::apply_sharpened(op, s.a1, q);
    } else {
        s.a1 = gaussian_matrix(op.cols(), k, derive(cfg.seed, 0));
        s.a2 = gaussian_matrix(op.rows(), k, derive(cfg.seed, 1));
        s.y1 = detail::apply_sharpened(op, s.a1, q);
        s.y2 = detail::apply_sharpened_transpose(op, s.a2, q);
    }
    return s;
}

/// Sketch of X itself (ignores any power exponent in cfg).
template <LinearOperator Op>
BilateralSketch bilateral_sketch(const Op& op, const SketchConfig& cfg) {
    SketchConfig flat = cfg;
    flat.power_q = 0;
    return power_sketch(op, flat);
}

/// Closed-form approximation from a sketch: L = y1 (a2' y1)^-1 y2', kept as
/// factors (left = y1, right = solved block) so no m x n product is formed.
inline LowRankFactors brp_approximate(const BilateralSketch& s,
                                      const ApproxOptions& opts = {}) {
    const Index k = s.y1.cols();
    DenseMatrix mid = matmul(transpose(s.a2), s.y1);
    DenseMatrix inv = detail::invert_middle(mid, opts);
    return {s.y1, matmul(inv, transpose(s.y2)), k};
}

/// Power-scheme approximation from an existing sketch of (X X')^q X: QR both
/// projections, take the (2q+1)-th root of the small middle factor by SVD,
/// and return Q1 * middle as the left factor with Q2' as the right.
template <LinearOperator Op>
LowRankFactors power_approximate(const Op& op, const SketchConfig& cfg,
                                 const BilateralSketch& s,
                                 const ApproxOptions& opts = {}) {
    if (cfg.power_q == 0) return brp_approximate(s, opts);
    const Index k = cfg.width();
    const int root = static_cast<int>(2 * cfg.power_q + 1);
    auto [q1, r1] = thin_qr(s.y1);
    auto [q2, r2] = thin_qr(s.y2);
    DenseMatrix raw;
    if (cfg.scheme == Scheme::correlated) {
        // Here a2' y1 == y2' y2 == r2' r2, so the middle factor
        // r1 (a2' y1)^-1 r2' collapses to r1 r2^-1 == q1' (X X')^q X q2.
        // Evaluating the right-hand form avoids squaring the condition
        // number of an already ill-conditioned projection.
        Vector sig = svd_full(r2).sigma;
        const double smin = sig(sig.size() - 1);
        const double cond = (smin > 0.0) ? sig(0) / smin
                                         : std::numeric_limits<double>::infinity();
        if (!(cond * cond <= opts.cond_limit) && !opts.pinv_fallback)
            throw singular_error(
                "power_approximate: middle matrix condition estimate " +
                    std::to_string(cond * cond) + " exceeds limit " +
                    std::to_string(opts.cond_limit) +
                    "; increase oversampling or enable the pinv fallback",
                cond * cond);
        raw = matmul(transpose(q1), detail::apply_sharpened(op, q2, cfg.power_q));
    } else {
        DenseMatrix mid = matmul(transpose(s.a2), s.y1);
        DenseMatrix inv = detail::invert_middle(mid, opts);
        raw = matmul(matmul(r1, inv), transpose(r2));
    }
    DenseMatrix middle = fractional_power_small(raw, root);
    return {matmul(q1, middle), transpose(q2), k};
}

/// Power-scheme approximation straight from the data.
template <LinearOperator Op>
LowRankFactors power_approximate(const Op& op, const SketchConfig& cfg,
                                 const ApproxOptions& opts = {}) {
    BilateralSketch s = power_sketch(op, cfg);
    return power_approximate(op, cfg, s, opts);
}

/// Correlated approximation (q = 0) evaluated in projection form:
/// L = X Q2 Q2' with Q2 an orthonormal basis of the second projection's
/// range.  Algebraically identical to brp_approximate of the correlated
/// sketch; numerically it recovers matrices of rank <= rank + oversample to
/// machine precision even when the middle matrix is too ill-conditioned to
/// invert, so the recovery experiments run through this path.
template <LinearOperator Op>
LowRankFactors rowspace_recover(const Op& op, const SketchConfig& cfg) {
    if (cfg.power_q != 0)
        throw config_error("rowspace_recover: only the q = 0 scheme is "
                           "evaluated in projection form");
    detail::validate_config(op, cfg);
    const Index k = cfg.width();
    DenseMatrix a1 = gaussian_matrix(op.cols(), k, derive(cfg.seed, 0));
    DenseMatrix y1 = op.apply(a1);
    DenseMatrix y2 = op.apply_transpose(y1);
    DenseMatrix q2 = thin_qr(y2).first;
    return {op.apply(q2), transpose(q2), k};
}

// Dense-matrix conveniences.
inline BilateralSketch power_sketch(const DenseMatrix& x, const SketchConfig& cfg) {
    return power_sketch(DenseOperator{x}, cfg);
}
inline BilateralSketch bilateral_sketch(const DenseMatrix& x, const SketchConfig& cfg) {
    return bilateral_sketch(DenseOperator{x}, cfg);
}
inline LowRankFactors power_approximate(const DenseMatrix& x, const SketchConfig& cfg,
                                        const ApproxOptions& opts = {}) {
    return power_approximate(DenseOperator{x}, cfg, opts);
}
inline LowRankFactors rowspace_recover(const DenseMatrix& x, const SketchConfig& cfg) {
    return rowspace_recover(DenseOperator{x}, cfg);
}

/// Materialize L = left * right.
inline DenseMatrix materialize(const LowRankFactors& f) {
    return matmul(f.left, f.right);
}

enum class ErrorNorm { spectral, frobenius };

/// ||x - L|| in the chosen norm, divided by ||x|| when relative (a zero
/// input falls back to the absolute error).
inline double approximation_error(const DenseMatrix& x, const LowRankFactors& f,
                                  ErrorNorm norm = ErrorNorm::frobenius,
                                  bool relative = true) {
    if (x.rows() != f.left.rows() || x.cols() != f.right.cols())
        throw shape_error("approximation_error: factors for " +
                          std::to_string(f.left.rows()) + "x" +
                          std::to_string(f.right.cols()) + " against data " +
                          detail::shape_of(x));
    DenseMatrix residual = x - materialize(f);
    const bool spectral = (norm == ErrorNorm::spectral);
    double err = spectral ? spectral_norm(residual) : frobenius_norm(residual);
    if (relative) {
        const double denom = spectral ? spectral_norm(x) : frobenius_norm(x);
        if (denom > 0.0) err /= denom;
    }
    return err;
}

/// Best rank-r approximation from the SVD, plus the full factorization for
/// reuse (baseline errors, bound evaluation).  Wide inputs are transposed
/// internally; the returned factors then carry thin u and v blocks.
inline std::pair<LowRankFactors, SvdFactors> truncated_svd(const DenseMatrix& x,
                                                           Index r) {
    if (r < 1 || r > std::min(x.rows(), x.cols()))
        throw config_error("truncated_svd: rank " + std::to_string(r) +
                           " out of range for " + detail::shape_of(x));
    if (x.rows() >= x.cols()) {
        SvdFactors f = svd_full(x);
        LowRankFactors lr{f.u.leftCols(r) * f.sigma.head(r).asDiagonal(),
                          DenseMatrix(f.v.leftCols(r).transpose()), r};
        return {std::move(lr), std::move(f)};
    }
    SvdFactors ft = svd_full(transpose(x));
    LowRankFactors lr{ft.v.leftCols(r) * ft.sigma.head(r).asDiagonal(),
                      DenseMatrix(ft.u.leftCols(r).transpose()), r};
    SvdFactors f{ft.v, ft.sigma, ft.u};
    return {std::move(lr), std::move(f)};
}

/// Relative Frobenius error ||a b - (a (b q)) q'||_F / ||a b||_F for a block
/// q with orthonormal columns (the basis rowspace_recover returns as its
/// right factor, transposed).  The residual is kept factored as
/// a (b - (b q) q'), so errors near machine precision survive; the generic
/// difference-of-Gram route in product_relative_error bottoms out near the
/// square root of machine epsilon and cannot certify recoveries below 1e-8.
inline double projected_product_error(const DenseMatrix& a, const DenseMatrix& b,
                                      const DenseMatrix& q) {
    if (a.cols() != b.rows() || q.rows() != b.cols())
        throw shape_error("projected_product_error: shape mismatch");
    const DenseMatrix c = b - matmul(matmul(b, q), transpose(q));
    const DenseMatrix ga = matmul(transpose(a), a);  // r x r
    const DenseMatrix gb = matmul(b, transpose(b));  // r x r
    const DenseMatrix gc = matmul(c, transpose(c));  // r x r
    const double err2 = std::max((ga.array() * gc.array()).sum(), 0.0);
    const double x2 = (ga.array() * gb.array()).sum();
    return (x2 > 0.0) ? std::sqrt(err2 / x2) : std::sqrt(err2);
}

/// Relative Frobenius error ||a b - L||_F / ||a b||_F computed through
/// k x k Gram blocks, so the m x n data matrix is never materialized.
/// Cancellation limits the resolution to roughly 1e-8; use
/// projected_product_error to certify near-exact recoveries.
inline double product_relative_error(const DenseMatrix& a, const DenseMatrix& b,
                                     const LowRankFactors& f) {
    if (a.cols() != b.rows() || a.rows() != f.left.rows() ||
        b.cols() != f.right.cols())
        throw shape_error("product_relative_error: shape mismatch");
    const DenseMatrix ga = matmul(transpose(a), a);     // r x r
    const DenseMatrix gb = matmul(b, transpose(b));     // r x r
    const DenseMatrix gl = matmul(transpose(f.left), f.left);    // k x k
    const DenseMatrix gr = matmul(f.right, transpose(f.right));  // k x k
    const DenseMatrix p = matmul(transpose(a), f.left);          // r x k
    const DenseMatrix s = matmul(f.right, transpose(b));         // k x r
    const double x2 = (ga.array() * gb.array()).sum();
    const double l2 = (gl.array() * gr.array()).sum();
    const double cross = (p.array() * s.transpose().array()).sum();
    const double err2 = std::max(x2 - 2.0 * cross + l2, 0.0);
    return (x2 > 0.0) ? std::sqrt(err2 / x2) : std::sqrt(err2);
}

} // namespace brp
