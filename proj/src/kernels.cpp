#include "dmdtrain/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <stdexcept>

namespace dmdtrain::kernels {

namespace {

thread_local std::uint64_t tl_flops = 0;

// Below this many flops the OpenMP fork/join overhead dominates.
constexpr std::uint64_t kParallelCutoff = 1u << 16;

bool go_parallel(std::uint64_t flops) {
  return flops >= kParallelCutoff && omp_get_max_threads() > 1;
}

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// One output row of C = A * B; k ascends so the per-element summation order
// is identical no matter which thread computes the row.
inline void matmul_row(const RealMatrix& a, const RealMatrix& b, RealMatrix& c, int i) {
  const double* arow = a.row_ptr(i);
  double* crow = c.row_ptr(i);
  for (int k = 0; k < a.cols; ++k) {
    const double aik = arow[k];
    const double* brow = b.row_ptr(k);
    for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
  }
}

inline void matmul_transA_row(const RealMatrix& a, const RealMatrix& b, RealMatrix& c, int i) {
  double* crow = c.row_ptr(i);
  for (int k = 0; k < a.rows; ++k) {
    const double aki = a(k, i);
    const double* brow = b.row_ptr(k);
    for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
  }
}

inline void matmul_transB_row(const RealMatrix& a, const RealMatrix& b, RealMatrix& c, int i) {
  const double* arow = a.row_ptr(i);
  double* crow = c.row_ptr(i);
  for (int j = 0; j < b.rows; ++j) {
    const double* brow = b.row_ptr(j);
    double acc = 0.0;
    for (int k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
    crow[j] = acc;
  }
}

// Upper-triangle row i of G = A^T A.
inline void gram_row(const RealMatrix& a, RealMatrix& g, int i) {
  double* grow = g.row_ptr(i);
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = a.row_ptr(k);
    const double aki = arow[i];
    for (int j = i; j < a.cols; ++j) grow[j] += aki * arow[j];
  }
}

inline void rxc_row(const RealMatrix& a, const ComplexMatrix& z, ComplexMatrix& p, int i) {
  const double* arow = a.row_ptr(i);
  complexd* prow = p.row_ptr(i);
  for (int k = 0; k < a.cols; ++k) {
    const double aik = arow[k];
    const complexd* zrow = z.row_ptr(k);
    for (int j = 0; j < z.cols; ++j) prow[j] += aik * zrow[j];
  }
}

}  // namespace

void set_threads(int n) { omp_set_num_threads(std::max(1, n)); }

int max_threads() { return omp_get_max_threads(); }

std::uint64_t thread_flops() { return tl_flops; }

void add_flops(std::uint64_t n) { tl_flops += n; }

RealMatrix matmul_serial(const RealMatrix& a, const RealMatrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions disagree");
  RealMatrix c(a.rows, b.cols);
  add_flops(2ull * a.rows * a.cols * b.cols);
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

RealMatrix matmul(const RealMatrix& a, const RealMatrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions disagree");
  const std::uint64_t flops = 2ull * a.rows * a.cols * b.cols;
  if (!go_parallel(flops)) return matmul_serial(a, b);
  RealMatrix c(a.rows, b.cols);
  add_flops(flops);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) matmul_row(a, b, c, i);
  return c;
}

RealMatrix matmul_transA_serial(const RealMatrix& a, const RealMatrix& b) {
  require(a.rows == b.rows, "matmul_transA: row counts disagree");
  RealMatrix c(a.cols, b.cols);
  add_flops(2ull * a.rows * a.cols * b.cols);
  for (int i = 0; i < a.cols; ++i) matmul_transA_row(a, b, c, i);
  return c;
}

RealMatrix matmul_transA(const RealMatrix& a, const RealMatrix& b) {
  require(a.rows == b.rows, "matmul_transA: row counts disagree");
  const std::uint64_t flops = 2ull * a.rows * a.cols * b.cols;
  if (!go_parallel(flops)) return matmul_transA_serial(a, b);
  RealMatrix c(a.cols, b.cols);
  add_flops(flops);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.cols; ++i) matmul_transA_row(a, b, c, i);
  return c;
}

RealMatrix matmul_transB_serial(const RealMatrix& a, const RealMatrix& b) {
  require(a.cols == b.cols, "matmul_transB: column counts disagree");
  RealMatrix c(a.rows, b.rows);
  add_flops(2ull * a.rows * a.cols * b.rows);
  for (int i = 0; i < a.rows; ++i) matmul_transB_row(a, b, c, i);
  return c;
}

RealMatrix matmul_transB(const RealMatrix& a, const RealMatrix& b) {
  require(a.cols == b.cols, "matmul_transB: column counts disagree");
  const std::uint64_t flops = 2ull * a.rows * a.cols * b.rows;
  if (!go_parallel(flops)) return matmul_transB_serial(a, b);
  RealMatrix c(a.rows, b.rows);
  add_flops(flops);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) matmul_transB_row(a, b, c, i);
  return c;
}

namespace {
void mirror_lower(RealMatrix& g) {
  for (int i = 1; i < g.rows; ++i)
    for (int j = 0; j < i; ++j) g(i, j) = g(j, i);
}
}  // namespace

RealMatrix gram_serial(const RealMatrix& a) {
  RealMatrix g(a.cols, a.cols);
  add_flops(std::uint64_t(a.rows) * a.cols * (a.cols + 1));
  for (int i = 0; i < a.cols; ++i) gram_row(a, g, i);
  mirror_lower(g);
  return g;
}

RealMatrix gram(const RealMatrix& a) {
  const std::uint64_t flops = std::uint64_t(a.rows) * a.cols * (a.cols + 1);
  if (!go_parallel(flops)) return gram_serial(a);
  RealMatrix g(a.cols, a.cols);
  add_flops(flops);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.cols; ++i) gram_row(a, g, i);
  mirror_lower(g);
  return g;
}

ComplexMatrix real_times_complex_serial(const RealMatrix& a, const ComplexMatrix& z) {
  require(a.cols == z.rows, "real_times_complex: inner dimensions disagree");
  ComplexMatrix p(a.rows, z.cols);
  add_flops(4ull * a.rows * a.cols * z.cols);
  for (int i = 0; i < a.rows; ++i) rxc_row(a, z, p, i);
  return p;
}

ComplexMatrix real_times_complex(const RealMatrix& a, const ComplexMatrix& z) {
  require(a.cols == z.rows, "real_times_complex: inner dimensions disagree");
  const std::uint64_t flops = 4ull * a.rows * a.cols * z.cols;
  if (!go_parallel(flops)) return real_times_complex_serial(a, z);
  ComplexMatrix p(a.rows, z.cols);
  add_flops(flops);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) rxc_row(a, z, p, i);
  return p;
}

std::vector<complexd> complex_matvec_serial(const ComplexMatrix& z, const std::vector<complexd>& c) {
  require(int(c.size()) == z.cols, "complex_matvec: length mismatch");
  std::vector<complexd> y(z.rows);
  add_flops(8ull * z.rows * z.cols);
  for (int i = 0; i < z.rows; ++i) {
    const complexd* zrow = z.row_ptr(i);
    complexd acc(0.0, 0.0);
    for (int j = 0; j < z.cols; ++j) acc += zrow[j] * c[j];
    y[i] = acc;
  }
  return y;
}

std::vector<complexd> complex_matvec(const ComplexMatrix& z, const std::vector<complexd>& c) {
  require(int(c.size()) == z.cols, "complex_matvec: length mismatch");
  const std::uint64_t flops = 8ull * z.rows * z.cols;
  if (!go_parallel(flops)) return complex_matvec_serial(z, c);
  std::vector<complexd> y(z.rows);
  add_flops(flops);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < z.rows; ++i) {
    const complexd* zrow = z.row_ptr(i);
    complexd acc(0.0, 0.0);
    for (int j = 0; j < z.cols; ++j) acc += zrow[j] * c[j];
    y[i] = acc;
  }
  return y;
}

std::vector<complexd> conj_transpose_times_real_serial(const ComplexMatrix& z, const std::vector<double>& w) {
  require(int(w.size()) == z.rows, "conj_transpose_times_real: length mismatch");
  std::vector<complexd> b(z.cols, complexd(0.0, 0.0));
  add_flops(4ull * z.rows * z.cols);
  for (int i = 0; i < z.rows; ++i) {
    const complexd* zrow = z.row_ptr(i);
    const double wi = w[i];
    for (int j = 0; j < z.cols; ++j) b[j] += std::conj(zrow[j]) * wi;
  }
  return b;
}

std::vector<complexd> conj_transpose_times_real(const ComplexMatrix& z, const std::vector<double>& w) {
  require(int(w.size()) == z.rows, "conj_transpose_times_real: length mismatch");
  const std::uint64_t flops = 4ull * z.rows * z.cols;
  if (!go_parallel(flops)) return conj_transpose_times_real_serial(z, w);
  std::vector<complexd> b(z.cols, complexd(0.0, 0.0));
  add_flops(flops);
  // Parallel over output entries; each b[j] still sums rows in ascending order.
#pragma omp parallel for schedule(static)
  for (int j = 0; j < z.cols; ++j) {
    complexd acc(0.0, 0.0);
    for (int i = 0; i < z.rows; ++i) acc += std::conj(z(i, j)) * w[i];
    b[j] = acc;
  }
  return b;
}

}  // namespace dmdtrain::kernels
