#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sdae/common.hpp"
#include "sdae/thread_pool.hpp"

namespace sdae {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles; the weight store for every layer.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

// Raw-pointer kernel cores. Each output element is reduced by exactly one
// worker, with the inner summation always running in ascending index order,
// so results are bitwise-equal at any thread count.
namespace kernels {

// out[i] = sum_j W[i*cols+j] * x[j], i in [0, rows)
inline void matvec(const double* w, std::size_t rows, std::size_t cols,
                   const double* x, double* out, ThreadPool& pool) {
    parallel_chunks(pool, rows, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
            const double* row = w + i * cols;
            double acc = 0.0;
            for (std::size_t j = 0; j < cols; ++j) acc += row[j] * x[j];
            out[i] = acc;
        }
    });
}

// out[j] = sum_i W[i*cols+j] * y[i], j in [0, cols). W^T is never
// materialized; each worker owns a column slice and sweeps rows, so the
// per-element accumulation order (i ascending) matches the serial loop.
inline void matvec_transposed(const double* w, std::size_t rows, std::size_t cols,
                              const double* y, double* out, ThreadPool& pool) {
    parallel_chunks(pool, cols, [&](std::size_t c0, std::size_t c1) {
        for (std::size_t j = c0; j < c1; ++j) out[j] = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
            const double* row = w + i * cols;
            const double yi = y[i];
            for (std::size_t j = c0; j < c1; ++j) out[j] += row[j] * yi;
        }
    });
}

// In place W[i][j] += scale * u[i] * v[j] (untransposed: u indexes rows)
// or W[i][j] += scale * u[j] * v[i] (transposed: u indexes columns).
inline void rank1_update(double* w, std::size_t rows, std::size_t cols, double scale,
                         const double* u, const double* v, bool transposed,
                         ThreadPool& pool) {
    parallel_chunks(pool, rows, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
            double* row = w + i * cols;
            if (!transposed) {
                const double su = scale * u[i];
                for (std::size_t j = 0; j < cols; ++j) row[j] += su * v[j];
            } else {
                const double sv = scale * v[i];
                for (std::size_t j = 0; j < cols; ++j) row[j] += sv * u[j];
            }
        }
    });
}

}  // namespace kernels

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline void sigmoid_vec_inplace(Vector& x) {
    for (double& v : x) v = sigmoid(v);
}

inline Vector sigmoid_vec(Vector x) {
    sigmoid_vec_inplace(x);
    return x;
}

// Max-subtracted softmax; entries positive and summing to 1.
inline Vector softmax_vec(const Vector& x) {
    require(!x.empty(), "softmax_vec: empty input");
    const double m = *std::max_element(x.begin(), x.end());
    Vector out(x.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out[i] = std::exp(x[i] - m);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

inline void matvec(const Matrix& w, const Vector& x, Vector& out, ThreadPool& pool) {
    require(x.size() == w.cols, "matvec: x.len " + std::to_string(x.size()) +
                                    " != cols " + std::to_string(w.cols));
    out.resize(w.rows);
    kernels::matvec(w.data.data(), w.rows, w.cols, x.data(), out.data(), pool);
}

inline Vector matvec(const Matrix& w, const Vector& x, ThreadPool& pool) {
    Vector out;
    matvec(w, x, out, pool);
    return out;
}

inline void matvec_transposed(const Matrix& w, const Vector& y, Vector& out,
                              ThreadPool& pool) {
    require(y.size() == w.rows, "matvec_transposed: y.len " + std::to_string(y.size()) +
                                    " != rows " + std::to_string(w.rows));
    out.resize(w.cols);
    kernels::matvec_transposed(w.data.data(), w.rows, w.cols, y.data(), out.data(), pool);
}

inline Vector matvec_transposed(const Matrix& w, const Vector& y, ThreadPool& pool) {
    Vector out;
    matvec_transposed(w, y, out, pool);
    return out;
}

inline void rank1_update(Matrix& w, double scale, const Vector& u, const Vector& v,
                         bool transposed, ThreadPool& pool) {
    const std::size_t want_u = transposed ? w.cols : w.rows;
    const std::size_t want_v = transposed ? w.rows : w.cols;
    require(u.size() == want_u && v.size() == want_v, "rank1_update: dimension mismatch");
    kernels::rank1_update(w.data.data(), w.rows, w.cols, scale, u.data(), v.data(),
                          transposed, pool);
}

}  // namespace sdae
