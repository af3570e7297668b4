#pragma once

// Dense row-major matrix container plus the three matmul kernels the
// autodiff engine needs (N*N, N*T, T*N operand layouts).

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace dar {

template <typename T>
struct Tensor {
    int rows = 0;
    int cols = 0;
    std::vector<T> data;

    Tensor() = default;
    Tensor(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, T{}) {
        if (r < 0 || c < 0) throw std::invalid_argument("tensor dims must be non-negative");
    }

    size_t size() const { return data.size(); }
    T* row(int r) { return data.data() + static_cast<size_t>(r) * cols; }
    const T* row(int r) const { return data.data() + static_cast<size_t>(r) * cols; }
    T& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    const T& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }

    void zero() { std::fill(data.begin(), data.end(), T{}); }
};

// C += A[m,k] * B[k,n]. k-outer axpy ordering: for each (i,k) scalar the B row
// is streamed, which keeps the inner loop contiguous for row-major storage.
template <typename T>
inline void mm_nn_acc(const T* a, const T* b, T* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<size_t>(i) * k;
        T* crow = c + static_cast<size_t>(i) * n;
        for (int p = 0; p < k; ++p) {
            const T s = arow[p];
            if (s == T{}) continue;
            const T* brow = b + static_cast<size_t>(p) * n;
            for (int j = 0; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

// C += A[m,k] * B^T where B is [n,k]: dot products of row pairs.
template <typename T>
inline void mm_nt_acc(const T* a, const T* b, T* c, int m, int k, int n) {
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<size_t>(i) * k;
        T* crow = c + static_cast<size_t>(i) * n;
        for (int j = 0; j < n; ++j) {
            const T* brow = b + static_cast<size_t>(j) * k;
            T acc{};
            for (int p = 0; p < k; ++p) acc += arow[p] * brow[p];
            crow[j] += acc;
        }
    }
}

// C += A^T * B where A is [k,m], B is [k,n]: axpy over the shared k axis.
template <typename T>
inline void mm_tn_acc(const T* a, const T* b, T* c, int m, int k, int n) {
    for (int p = 0; p < k; ++p) {
        const T* arow = a + static_cast<size_t>(p) * m;
        const T* brow = b + static_cast<size_t>(p) * n;
        for (int i = 0; i < m; ++i) {
            const T s = arow[i];
            if (s == T{}) continue;
            T* crow = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) crow[j] += s * brow[j];
        }
    }
}

template <typename T>
inline Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.cols != b.rows) {
        throw std::invalid_argument("matmul: inner dims mismatch " + std::to_string(a.cols) + " vs " +
                                    std::to_string(b.rows));
    }
    Tensor<T> c(a.rows, b.cols);
    mm_nn_acc(a.data.data(), b.data.data(), c.data.data(), a.rows, a.cols, b.cols);
    return c;
}

}  // namespace dar
