#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "burnscan/util/error.hpp"

namespace burnscan::nn {

// Dense row-major tensor; activations are NCHW throughout. The scalar type
// is a template parameter so the whole stack can run in double for gradient
// verification while production uses float.
template <typename T>
struct Tensor {
  std::vector<long> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<long> s) : shape(std::move(s)), v(count(shape), T(0)) {}

  static long count(const std::vector<long>& s) {
    long n = 1;
    for (long d : s) n *= d;
    return n;
  }

  static Tensor zeros(std::vector<long> s) { return Tensor(std::move(s)); }

  long numel() const { return long(v.size()); }
  long size(int i) const { return shape[std::size_t(i)]; }
  int ndim() const { return int(shape.size()); }

  T* data() { return v.data(); }
  const T* data() const { return v.data(); }

  // 4d accessors for tests and glue code; hot loops index manually.
  T& at(long n, long c, long h, long w) {
    return v[std::size_t(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
  T at(long n, long c, long h, long w) const {
    return v[std::size_t(((n * shape[1] + c) * shape[2] + h) * shape[3] + w)];
  }
};

inline std::string shape_string(const std::vector<long>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i)
    out += (i ? "," : "") + std::to_string(s[i]);
  return out + ")";
}

template <typename T>
void require_shape(const Tensor<T>& t, const std::vector<long>& want,
                   const std::string& what) {
  if (t.shape != want)
    throw Error(Errc::shape_error, what + ": expected " + shape_string(want) +
                                       ", got " + shape_string(t.shape));
}

}  // namespace burnscan::nn
