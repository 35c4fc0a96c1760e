#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace depthforge {

class ShapeMismatchError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

// Dense row-major tensor, up to 4 dims (batch, channel, height, width).
template <typename T>
struct Tensor {
    std::vector<int> shape;
    std::vector<T> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s)
        : shape(std::move(s)), data(numel_of(shape), T{}) {}

    static size_t numel_of(const std::vector<int>& s) {
        size_t n = 1;
        for (int d : s) {
            if (d < 0) throw ShapeMismatchError("negative tensor dim");
            n *= static_cast<size_t>(d);
        }
        return s.empty() ? 0 : n;
    }

    size_t numel() const { return data.size(); }

    // 4-D accessor (n, c, h, w); only valid for 4-dim tensors.
    T& at(int n, int c, int h, int w) {
        return data[((static_cast<size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }
    T at(int n, int c, int h, int w) const {
        return data[((static_cast<size_t>(n) * shape[1] + c) * shape[2] + h) * shape[3] + w];
    }

    std::string shape_str() const {
        std::string s = "(";
        for (size_t i = 0; i < shape.size(); ++i) {
            if (i) s += ",";
            s += std::to_string(shape[i]);
        }
        return s + ")";
    }
};

// C (MxN) = A (MxK) * B (KxN), all row-major. Accumulates when acc is true.
template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
    if (!acc) std::fill(c, c + static_cast<size_t>(m) * n, T{});
    for (int i = 0; i < m; ++i) {
        const T* arow = a + static_cast<size_t>(i) * k;
        T* crow = c + static_cast<size_t>(i) * n;
        for (int kk = 0; kk < k; ++kk) {
            const T aik = arow[kk];
            if (aik == T{}) continue;
            const T* brow = b + static_cast<size_t>(kk) * n;
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

// C (MxN) = A^T * B where A is KxM row-major.
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
    if (!acc) std::fill(c, c + static_cast<size_t>(m) * n, T{});
    for (int kk = 0; kk < k; ++kk) {
        const T* arow = a + static_cast<size_t>(kk) * m;
        const T* brow = b + static_cast<size_t>(kk) * n;
        for (int i = 0; i < m; ++i) {
            const T aik = arow[i];
            if (aik == T{}) continue;
            T* crow = c + static_cast<size_t>(i) * n;
            for (int j = 0; j < n; ++j) crow[j] += aik * brow[j];
        }
    }
}

// C (MxN) = A * B^T where B is NxK row-major. Row-of-B dot products do not
// vectorize as reductions, so transpose B once and reuse the ikj kernel; the
// accumulation order is fixed either way, results stay deterministic.
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, int m, int k, int n, bool acc = false) {
    std::vector<T> bt(static_cast<size_t>(k) * n);
    for (int j = 0; j < n; ++j) {
        const T* brow = b + static_cast<size_t>(j) * k;
        for (int kk = 0; kk < k; ++kk) bt[static_cast<size_t>(kk) * n + j] = brow[kk];
    }
    gemm(a, bt.data(), c, m, k, n, acc);
}

}  // namespace depthforge
