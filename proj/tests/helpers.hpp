#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <initializer_list>
#include <limits>

#include "brp/brp.hpp"

namespace testutil {

// Row-major literal: values listed row by row.
inline brp::DenseMatrix from_rows(brp::Index rows, brp::Index cols,
                                  std::initializer_list<double> values) {
    brp::DenseMatrix m(rows, cols);
    if (static_cast<brp::Index>(values.size()) != m.size())
        throw std::logic_error("from_rows: wrong number of values");
    std::copy(values.begin(), values.end(), m.data());
    return m;
}

inline brp::DenseMatrix diagonal(std::initializer_list<double> values) {
    const auto n = static_cast<brp::Index>(values.size());
    brp::DenseMatrix m = brp::DenseMatrix::Zero(n, n);
    brp::Index i = 0;
    for (double v : values) m(i, i) = v, ++i;
    return m;
}

inline double max_abs_diff(const brp::DenseMatrix& a, const brp::DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        return std::numeric_limits<double>::infinity();
    if (a.size() == 0) return 0.0;
    return (a - b).cwiseAbs().maxCoeff();
}

inline bool bitwise_equal(const brp::DenseMatrix& a, const brp::DenseMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           (a.size() == 0 ||
            std::memcmp(a.data(), b.data(),
                        sizeof(double) * static_cast<std::size_t>(a.size())) == 0);
}

inline brp::Vector geometric_spectrum(double rho, brp::Index n) {
    brp::Vector s(n);
    double cur = 1.0;
    for (brp::Index i = 0; i < n; ++i, cur *= rho) s(i) = cur;
    return s;
}

inline brp::Vector inverse_power_spectrum(double alpha, brp::Index n) {
    brp::Vector s(n);
    for (brp::Index i = 0; i < n; ++i)
        s(i) = std::pow(static_cast<double>(i + 1), -alpha);
    return s;
}

inline double mean_of(const std::vector<double>& v) {
    double sum = 0.0;
    for (double x : v) sum += x;
    return v.empty() ? 0.0 : sum / static_cast<double>(v.size());
}

// Standard error of the sample mean.
inline double se_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const auto n = static_cast<double>(v.size());
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace testutil
