#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "lgc/errors.hpp"

// Small dense symmetric helpers (parameter counts are tiny; covariance
// matrices reach T+1 for the covariate Gaussian likelihood).

namespace lgc::detail {

/// Row-major square matrix stored in a flat vector.
struct Mat {
    std::size_t n = 0;
    std::vector<double> a;

    explicit Mat(std::size_t n_) : n(n_), a(n_ * n_, 0.0) {}
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

/// In-place lower Cholesky; throws lgc::numerical_error when not positive
/// definite.
inline void cholesky(Mat& m) {
    const std::size_t n = m.n;
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        for (std::size_t k = 0; k < j; ++k) d -= m(j, k) * m(j, k);
        if (!(d > 0.0)) throw lgc::numerical_error("cholesky: matrix not positive definite");
        const double l = std::sqrt(d);
        m(j, j) = l;
        for (std::size_t i = j + 1; i < n; ++i) {
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= m(i, k) * m(j, k);
            m(i, j) = s / l;
        }
        for (std::size_t k = j + 1; k < n; ++k) m(j, k) = 0.0;
    }
}

/// Solves L y = b with L lower triangular.
inline std::vector<double> forward_solve(const Mat& l, const std::vector<double>& b) {
    std::vector<double> y(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        double s = b[i];
        for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
        y[i] = s / l(i, i);
    }
    return y;
}

/// Inverse of a symmetric positive definite matrix through Cholesky.
inline Mat spd_inverse(Mat m) {
    const std::size_t n = m.n;
    cholesky(m);
    // invert L
    Mat li(n);
    for (std::size_t i = 0; i < n; ++i) {
        li(i, i) = 1.0 / m(i, i);
        for (std::size_t j = 0; j < i; ++j) {
            double s = 0.0;
            for (std::size_t k = j; k < i; ++k) s -= m(i, k) * li(k, j);
            li(i, j) = s / m(i, i);
        }
    }
    // inv = L^-T L^-1
    Mat inv(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = 0.0;
            for (std::size_t k = i; k < n; ++k) s += li(k, i) * li(k, j);
            inv(i, j) = s;
            inv(j, i) = s;
        }
    }
    return inv;
}

/// Gaussian-elimination solve for small general systems.
inline std::vector<double> gauss_solve(Mat a, std::vector<double> b) {
    const std::size_t n = a.n;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
        }
        if (std::fabs(a(piv, col)) < 1e-300) throw lgc::numerical_error("gauss_solve: singular matrix");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(piv, c), a(col, c));
            std::swap(b[piv], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) s -= a(ri, c) * x[c];
        x[ri] = s / a(ri, ri);
    }
    return x;
}

} // namespace lgc::detail
