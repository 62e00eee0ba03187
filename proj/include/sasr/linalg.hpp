// Copyright 2026 The sasr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "sasr/error.hpp"

namespace sasr {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Deliberately minimal: the pipeline only
// needs storage, products with vectors, and a symmetric eigensolver.
class Matrix {
  public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    Matrix(std::size_t rows, std::size_t cols, Vec data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw DimensionError("Matrix: data length " +
                                 std::to_string(data_.size()) +
                                 " does not match " + std::to_string(rows_) +
                                 "x" + std::to_string(cols_));
        }
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto &r : rows) {
            if (r.size() != cols_) {
                throw DimensionError("Matrix: ragged initializer");
            }
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double &operator()(std::size_t r, std::size_t c) {
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        return data_[r * cols_ + c];
    }

    std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    std::span<double> row(std::size_t r) {
        return {data_.data() + r * cols_, cols_};
    }

    const Vec &data() const { return data_; }
    Vec &data() { return data_; }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static Matrix diagonal(std::span<const double> d) {
        Matrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(),
                           [](double v) { return std::isfinite(v); });
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vec data_;
};

struct EigenResult {
    Vec eigenvalues;      // ascending
    Matrix eigenvectors;  // column i pairs with eigenvalues[i], unit norm
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("dot: length mismatch");
    }
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

inline double norm(std::span<const double> a) {
    return std::sqrt(dot(a, a));
}

// y = M x
inline Vec mat_vec(const Matrix &m, std::span<const double> x) {
    if (m.cols() != x.size()) {
        throw DimensionError("mat_vec: " + std::to_string(m.cols()) +
                             " cols vs vector of " + std::to_string(x.size()));
    }
    Vec y(m.rows(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        y[r] = std::inner_product(m.row(r).begin(), m.row(r).end(), x.begin(),
                                  0.0);
    }
    return y;
}

// y = M^T x  (x weights the rows of M)
inline Vec mat_t_vec(const Matrix &m, std::span<const double> x) {
    if (m.rows() != x.size()) {
        throw DimensionError("mat_t_vec: row count mismatch");
    }
    Vec y(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols(); ++c) y[c] += x[r] * row[c];
    }
    return y;
}

inline Vec softmax(std::span<const double> v) {
    if (v.empty()) {
        throw DomainError("softmax: empty input");
    }
    const double m = *std::max_element(v.begin(), v.end());
    Vec out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - m);
        sum += out[i];
    }
    for (double &x : out) x /= sum;
    return out;
}

inline Vec log_softmax(std::span<const double> v) {
    if (v.empty()) {
        throw DomainError("log_softmax: empty input");
    }
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - m);
    const double log_z = m + std::log(sum);
    Vec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - log_z;
    return out;
}

inline double cosine(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw DimensionError("cosine: length mismatch");
    }
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw DomainError("cosine: zero-norm vector");
    }
    return std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
}

namespace detail {

// One Jacobi rotation zeroing a(p,q); updates a and accumulates into v.
inline void jacobi_rotate(Matrix &a, Matrix &v, std::size_t p, std::size_t q) {
    const double apq = a(p, q);
    if (apq == 0.0) return;
    const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
    double t;
    if (std::abs(theta) > 1e150) {
        t = 1.0 / (2.0 * theta);
    } else {
        t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
    }
    const double c = 1.0 / std::sqrt(1.0 + t * t);
    const double s = t * c;
    const std::size_t n = a.rows();

    const double app = a(p, p);
    const double aqq = a(q, q);
    a(p, p) = app - t * apq;
    a(q, q) = aqq + t * apq;
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (i == p || i == q) continue;
        const double aip = a(i, p);
        const double aiq = a(i, q);
        a(i, p) = c * aip - s * aiq;
        a(p, i) = a(i, p);
        a(i, q) = c * aiq + s * aip;
        a(q, i) = a(i, q);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double vip = v(i, p);
        const double viq = v(i, q);
        v(i, p) = c * vip - s * viq;
        v(i, q) = c * viq + s * vip;
    }
}

inline double off_diagonal_norm(const Matrix &a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = i + 1; j < a.cols(); ++j) {
            sum += 2.0 * a(i, j) * a(i, j);
        }
    }
    return std::sqrt(sum);
}

}  // namespace detail

// Full eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
// The affinity matrices this project feeds in stay small (a few hundred
// rows), where Jacobi is accurate and simple.
inline EigenResult symmetric_eigen(const Matrix &input) {
    if (input.rows() != input.cols()) {
        throw DimensionError("symmetric_eigen: matrix is not square");
    }
    const std::size_t n = input.rows();
    if (n == 0) {
        throw DimensionError("symmetric_eigen: empty matrix");
    }
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            scale = std::max(scale, std::abs(input(i, j)));
        }
    }
    const double sym_tol = 1e-10 * std::max(1.0, scale);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (std::abs(input(i, j) - input(j, i)) > sym_tol) {
                throw DimensionError("symmetric_eigen: matrix is asymmetric");
            }
        }
    }

    Matrix a = input;
    // Enforce exact symmetry before sweeping.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double m = 0.5 * (a(i, j) + a(j, i));
            a(i, j) = m;
            a(j, i) = m;
        }
    }
    Matrix v = Matrix::identity(n);

    const double stop = 1e-14 * std::max(1.0, scale) * static_cast<double>(n);
    const int max_sweeps = 100;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        if (detail::off_diagonal_norm(a) <= stop) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                detail::jacobi_rotate(a, v, p, q);
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
        return a(i, i) < a(j, j);
    });

    EigenResult result;
    result.eigenvalues.resize(n);
    result.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        result.eigenvalues[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) {
            result.eigenvectors(i, k) = v(i, order[k]);
        }
    }
    return result;
}

}  // namespace sasr
