#pragma once

#include "cascade/errors.hpp"

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace cascade::nn {

// Dense row-major tensor. Rank is small (<= 3 in practice); shape is part of
// the value. Scalar type T is float for training and double for the
// finite-difference suites.
template <typename T>
struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<T> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> d) : dims(std::move(d)) {
    data.assign(count(dims), T(0));
  }

  static std::size_t count(const std::vector<std::size_t>& d) {
    std::size_t n = 1;
    for (std::size_t x : d) n *= x;
    return n;
  }

  static Tensor zeros(std::initializer_list<std::size_t> d) {
    return Tensor(std::vector<std::size_t>(d));
  }
  static Tensor scalar(T v) {
    Tensor t(std::vector<std::size_t>{1});
    t.data[0] = v;
    return t;
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return dims.size(); }
  std::size_t dim(std::size_t i) const { return dims[i]; }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& at(std::size_t i) { return data[i]; }
  const T& at(std::size_t i) const { return data[i]; }
  T& at(std::size_t i, std::size_t j) { return data[i * dims[1] + j]; }
  const T& at(std::size_t i, std::size_t j) const { return data[i * dims[1] + j]; }
  T& at(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * dims[1] + j) * dims[2] + k];
  }
  const T& at(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * dims[1] + j) * dims[2] + k];
  }

  bool same_shape(const Tensor& other) const { return dims == other.dims; }

  bool all_finite() const {
    for (T v : data) {
      if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.dims = dims;
    out.data.reserve(data.size());
    for (T v : data) out.data.push_back(static_cast<U>(v));
    return out;
  }

  std::string shape_str() const {
    std::string s = "[";
    for (std::size_t i = 0; i < dims.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(dims[i]);
    }
    return s + "]";
  }
};

// C[m,n] (+)= A[m,k] * B[k,n]
template <typename T>
void gemm_nn(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = T(0);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = arow[p];
      if (av == T(0)) continue;
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

// C[m,n] (+)= A[m,k] * B[n,k]^T
template <typename T>
void gemm_nt(const T* a, const T* b, T* c, std::size_t m, std::size_t k, std::size_t n,
             bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      const T* brow = b + j * k;
      T acc = T(0);
      for (std::size_t p = 0; p < k; ++p) acc += arow[p] * brow[p];
      crow[j] = accumulate ? crow[j] + acc : acc;
    }
  }
}

// C[m,n] (+)= A[r,m]^T * B[r,n]
template <typename T>
void gemm_tn(const T* a, const T* b, T* c, std::size_t r, std::size_t m, std::size_t n,
             bool accumulate) {
  if (!accumulate) {
    for (std::size_t i = 0; i < m * n; ++i) c[i] = T(0);
  }
  for (std::size_t p = 0; p < r; ++p) {
    const T* arow = a + p * m;
    const T* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const T av = arow[i];
      if (av == T(0)) continue;
      T* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

} // namespace cascade::nn
