#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>

#include "brp/errors.hpp"

namespace brp {

using Index = Eigen::Index;

// Row-major dense matrix of doubles: the single carrier type for data
// matrices, sketches, and factors.  Row-major keeps the in-memory layout
// identical to the binary file format, so raw I/O can round-trip bit-exactly.
using DenseMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Vector = Eigen::VectorXd;

// Thin SVD of a tall-or-square matrix: u is m x n with orthonormal columns,
// sigma descending and nonnegative, v is n x n orthogonal.
struct SvdFactors {
    DenseMatrix u;
    Vector sigma;
    DenseMatrix v;
};

namespace detail {

inline std::string shape_of(const DenseMatrix& a) {
    return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

inline void require_finite(const DenseMatrix& a, const char* op) {
    if (!a.allFinite())
        throw error(std::string(op) + ": result contains non-finite values");
}

// 64-bit finalizer shared with the random module (same mixing constants);
// used here only to build a fixed, reproducible start vector.
inline std::uint64_t mix64(std::uint64_t x) {
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

} // namespace detail

/// Dense product a*b with an explicit shape check.
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw shape_error("matmul: incompatible shapes " + detail::shape_of(a) +
                          " times " + detail::shape_of(b));
    DenseMatrix c = a * b;
    detail::require_finite(c, "matmul");
    return c;
}

/// Materialized transpose.
inline DenseMatrix transpose(const DenseMatrix& a) {
    return a.transpose();
}

/// Square root of the sum of squared entries.
inline double frobenius_norm(const DenseMatrix& a) {
    return a.norm();
}

/// Thin QR of a tall-or-square matrix via Householder reflections.
/// q is rows x cols with orthonormal columns, r is cols x cols upper
/// triangular with nonnegative diagonal (signs normalized so the
/// factorization is unique for full-rank input).  Rank-deficient input is
/// permitted: r then carries zero (or tiny) diagonal entries.
inline std::pair<DenseMatrix, DenseMatrix> thin_qr(const DenseMatrix& a) {
    if (a.rows() < a.cols())
        throw shape_error("thin_qr: need rows >= cols, got " + detail::shape_of(a));
    const Index k = a.cols();
    Eigen::HouseholderQR<DenseMatrix> qr(a);
    DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(a.rows(), k);
    DenseMatrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    for (Index j = 0; j < k; ++j) {
        if (r(j, j) < 0.0) {
            r.row(j) = -r.row(j);
            q.col(j) = -q.col(j);
        }
    }
    detail::require_finite(q, "thin_qr");
    detail::require_finite(r, "thin_qr");
    return {std::move(q), std::move(r)};
}

/// Full SVD of a tall-or-square matrix (wide callers transpose first).
inline SvdFactors svd_full(const DenseMatrix& a) {
    if (a.rows() < a.cols())
        throw shape_error("svd_full: need rows >= cols, got " + detail::shape_of(a) +
                          " (transpose first)");
    Eigen::BDCSVD<DenseMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
    SvdFactors f{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    detail::require_finite(f.u, "svd_full");
    detail::require_finite(f.v, "svd_full");
    return f;
}

/// Inverse of a small square matrix, computed through its SVD so the
/// condition number comes for free.  Throws singular_error when the
/// condition estimate exceeds cond_limit; callers may then retry via pinv.
inline DenseMatrix invert_small(const DenseMatrix& m, double cond_limit = 1e12) {
    if (m.rows() != m.cols())
        throw shape_error("invert_small: matrix must be square, got " +
                          detail::shape_of(m));
    SvdFactors f = svd_full(m);
    const double smax = f.sigma(0);
    const double smin = f.sigma(f.sigma.size() - 1);
    const double cond = (smin > 0.0) ? smax / smin
                                     : std::numeric_limits<double>::infinity();
    if (!(cond <= cond_limit))
        throw singular_error("invert_small: condition estimate " +
                                 std::to_string(cond) + " exceeds limit " +
                                 std::to_string(cond_limit) +
                                 "; increase oversampling or retry via pinv",
                             cond);
    return f.v * f.sigma.cwiseInverse().asDiagonal() * f.u.transpose();
}

/// Moore-Penrose pseudo-inverse; singular values below tol * sigma_max are
/// treated as zero.
inline DenseMatrix pinv(const DenseMatrix& m, double tol) {
    if (m.rows() < m.cols())
        return DenseMatrix(pinv(transpose(m), tol).transpose());
    SvdFactors f = svd_full(m);
    const double cutoff = tol * (f.sigma.size() > 0 ? f.sigma(0) : 0.0);
    Vector inv = Vector::Zero(f.sigma.size());
    for (Index i = 0; i < f.sigma.size(); ++i)
        if (f.sigma(i) > cutoff) inv(i) = 1.0 / f.sigma(i);
    return f.v * inv.asDiagonal() * f.u.transpose();
}

/// pinv with the default cutoff 1e-12 * max(rows, cols).
inline DenseMatrix pinv(const DenseMatrix& m) {
    return pinv(m, 1e-12 * static_cast<double>(std::max(m.rows(), m.cols())));
}

/// Largest singular value via power iteration on a'a: deterministic fixed
/// start vector, relative tolerance 1e-12 on the Rayleigh quotient, at most
/// 10000 iterations.
inline double spectral_norm(const DenseMatrix& a) {
    const Index n = a.cols();
    Vector v(n);
    std::uint64_t state = 0x9E3779B97F4A7C15ull;
    for (Index j = 0; j < n; ++j) {
        state += 0x9E3779B97F4A7C15ull;
        const std::uint64_t bits = detail::mix64(state);
        v(j) = static_cast<double>((bits >> 11) + 1) * 0x1.0p-53 - 0.5;
    }
    double vn = v.norm();
    if (vn == 0.0) return 0.0;
    v /= vn;
    double s2 = 0.0;
    double prev = -1.0;
    for (int iter = 0; iter < 10000; ++iter) {
        Vector av = a * v;
        s2 = av.squaredNorm();
        if (s2 == 0.0) return 0.0;
        Vector w = a.transpose() * av;
        const double wn = w.norm();
        if (wn == 0.0) break;
        v = w / wn;
        if (prev >= 0.0 && std::abs(s2 - prev) <= 1e-12 * s2) break;
        prev = s2;
    }
    return std::sqrt(s2);
}

/// Entrywise odd root of a small square matrix through its SVD:
/// m = U S V' maps to U S^(1/root) V'.  root == 1 returns the input
/// unchanged so repeated application is bit-stable.
inline DenseMatrix fractional_power_small(const DenseMatrix& m, int root) {
    if (m.rows() != m.cols())
        throw shape_error("fractional_power_small: matrix must be square, got " +
                          detail::shape_of(m));
    if (root < 1 || root % 2 == 0)
        throw config_error("fractional_power_small: root must be an odd positive "
                           "integer, got " + std::to_string(root));
    if (root == 1) return m;
    SvdFactors f = svd_full(m);
    Vector powered(f.sigma.size());
    const double inv_root = 1.0 / static_cast<double>(root);
    for (Index i = 0; i < f.sigma.size(); ++i)
        powered(i) = std::pow(f.sigma(i), inv_root);
    return f.u * powered.asDiagonal() * f.v.transpose();
}

} // namespace brp
