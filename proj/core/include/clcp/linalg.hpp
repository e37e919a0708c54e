// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 clcp-sim authors

#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace clcp {

// Small dense complex matrices for the multi-user equalizers. Row-major.
struct CMat {
    int rows = 0;
    int cols = 0;
    std::vector<std::complex<double>> v;

    CMat() = default;
    CMat(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c) {}

    std::complex<double>& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
    const std::complex<double>& at(int r, int c) const {
        return v[static_cast<std::size_t>(r) * cols + c];
    }

    CMat hermitian() const {
        CMat h(cols, rows);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) h.at(c, r) = std::conj(at(r, c));
        return h;
    }
};

inline CMat matmul(const CMat& a, const CMat& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: dimension mismatch");
    CMat y(a.rows, b.cols);
    for (int r = 0; r < a.rows; ++r)
        for (int k = 0; k < a.cols; ++k) {
            const std::complex<double> av = a.at(r, k);
            if (av == std::complex<double>{}) continue;
            for (int c = 0; c < b.cols; ++c) y.at(r, c) += av * b.at(k, c);
        }
    return y;
}

// Gaussian elimination with partial pivoting. Returns false (and leaves
// `out` unspecified) when the matrix is numerically singular.
inline bool invert(const CMat& a, CMat& out, double pivot_tol = 1e-12) {
    if (a.rows != a.cols) throw std::invalid_argument("invert: matrix not square");
    const int n = a.rows;
    CMat work = a;
    out = CMat(n, n);
    for (int i = 0; i < n; ++i) out.at(i, i) = 1.0;

    double scale = 0.0;
    for (const auto& x : a.v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return false;

    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(work.at(col, col));
        for (int r = col + 1; r < n; ++r) {
            const double m = std::abs(work.at(r, col));
            if (m > best) {
                best = m;
                pivot = r;
            }
        }
        if (best <= pivot_tol * scale) return false;
        if (pivot != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(work.at(pivot, c), work.at(col, c));
                std::swap(out.at(pivot, c), out.at(col, c));
            }
        }
        const std::complex<double> inv_p = 1.0 / work.at(col, col);
        for (int c = 0; c < n; ++c) {
            work.at(col, c) *= inv_p;
            out.at(col, c) *= inv_p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const std::complex<double> factor = work.at(r, col);
            if (factor == std::complex<double>{}) continue;
            for (int c = 0; c < n; ++c) {
                work.at(r, c) -= factor * work.at(col, c);
                out.at(r, c) -= factor * out.at(col, c);
            }
        }
    }
    return true;
}

}  // namespace clcp
