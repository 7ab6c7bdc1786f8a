#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace dmdtrain {

using complexd = std::complex<double>;

// Dense real matrix. Storage is row-major: entry (r, c) lives at
// data[r * cols + c]. This convention is fixed across the project.
struct RealMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  RealMatrix() = default;
  RealMatrix(int r, int c) : rows(r), cols(c), data(std::size_t(r) * std::size_t(c), 0.0) {}

  double& operator()(int r, int c) { return data[std::size_t(r) * cols + c]; }
  double operator()(int r, int c) const { return data[std::size_t(r) * cols + c]; }

  double* row_ptr(int r) { return data.data() + std::size_t(r) * cols; }
  const double* row_ptr(int r) const { return data.data() + std::size_t(r) * cols; }

  std::size_t size() const { return data.size(); }
};

// Dense complex matrix, same row-major layout as RealMatrix.
struct ComplexMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<complexd> data;

  ComplexMatrix() = default;
  ComplexMatrix(int r, int c) : rows(r), cols(c), data(std::size_t(r) * std::size_t(c)) {}

  complexd& operator()(int r, int c) { return data[std::size_t(r) * cols + c]; }
  complexd operator()(int r, int c) const { return data[std::size_t(r) * cols + c]; }

  complexd* row_ptr(int r) { return data.data() + std::size_t(r) * cols; }
  const complexd* row_ptr(int r) const { return data.data() + std::size_t(r) * cols; }
};

inline RealMatrix identity_matrix(int n) {
  RealMatrix I(n, n);
  for (int i = 0; i < n; ++i) I(i, i) = 1.0;
  return I;
}

inline bool all_finite(const RealMatrix& a) {
  for (double v : a.data)
    if (!std::isfinite(v)) return false;
  return true;
}

inline bool all_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline double frobenius_norm(const RealMatrix& a) {
  double s = 0.0;
  for (double v : a.data) s += v * v;
  return std::sqrt(s);
}

inline double vector_norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace dmdtrain
