#include "dmdtrain/dmd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dmdtrain/errors.hpp"
#include "dmdtrain/kernels.hpp"
#include "dmdtrain/linalg.hpp"

namespace dmdtrain::dmd {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

complexd cpow_int(complexd base, long e) {
  complexd acc(1.0, 0.0);
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

// Solve (Phi^H Phi) b = Phi^H w, the normal equations of min ||Phi b - w||.
std::vector<complexd> least_squares_amplitudes(const ComplexMatrix& phi,
                                               const std::vector<double>& w) {
  const int n = phi.rows;
  const int r = phi.cols;
  ComplexMatrix g(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      complexd acc(0.0, 0.0);
      for (int i = 0; i < n; ++i) acc += std::conj(phi(i, a)) * phi(i, b);
      g(a, b) = acc;
    }
  kernels::add_flops(8ull * n * r * r);
  std::vector<complexd> rhs = kernels::conj_transpose_times_real(phi, w);

  // small complex LU with partial pivoting
  std::vector<int> piv(r);
  for (int k = 0; k < r; ++k) {
    int p = k;
    for (int i = k + 1; i < r; ++i)
      if (std::abs(g(i, k)) > std::abs(g(p, k))) p = i;
    piv[k] = p;
    if (p != k)
      for (int j = 0; j < r; ++j) std::swap(g(k, j), g(p, j));
    if (std::abs(g(k, k)) == 0.0)
      throw numeric_error("least-squares amplitudes: singular normal equations");
    for (int i = k + 1; i < r; ++i) {
      g(i, k) /= g(k, k);
      for (int j = k + 1; j < r; ++j) g(i, j) -= g(i, k) * g(k, j);
    }
  }
  for (int k = 0; k < r; ++k) {
    std::swap(rhs[k], rhs[piv[k]]);
    for (int i = k + 1; i < r; ++i) rhs[i] -= g(i, k) * rhs[k];
  }
  for (int k = r - 1; k >= 0; --k) {
    for (int j = k + 1; j < r; ++j) rhs[k] -= g(k, j) * rhs[j];
    rhs[k] /= g(k, k);
  }
  return rhs;
}

}  // namespace

void SnapshotBuffer::push(const std::vector<double>& w) {
  if (int(w.size()) != dim) throw std::invalid_argument("push_snapshot: dimension mismatch");
  if (full()) throw std::invalid_argument("buffer full; fit or reset first");
  if (!all_finite(w)) throw numeric_error("push_snapshot: non-finite entries");
  columns.push_back(w);
}

RealMatrix SnapshotBuffer::to_matrix() const {
  RealMatrix w(dim, size());
  for (int j = 0; j < size(); ++j)
    for (int i = 0; i < dim; ++i) w(i, j) = columns[j][i];
  return w;
}

std::pair<RealMatrix, RealMatrix> shift_split(const RealMatrix& w) {
  if (w.cols < 2) throw std::invalid_argument("need at least two snapshots");
  RealMatrix minus(w.rows, w.cols - 1);
  RealMatrix plus(w.rows, w.cols - 1);
  for (int i = 0; i < w.rows; ++i) {
    const double* row = w.row_ptr(i);
    double* mrow = minus.row_ptr(i);
    double* prow = plus.row_ptr(i);
    for (int j = 0; j + 1 < w.cols; ++j) {
      mrow[j] = row[j];
      prow[j] = row[j + 1];
    }
  }
  return {std::move(minus), std::move(plus)};
}

DMDModel fit_dmd(const RealMatrix& w, double tol, const Options& opts) {
  if (w.cols < 2) throw std::invalid_argument("need at least two snapshots");

  const std::uint64_t flops0 = kernels::thread_flops();
  auto [wminus, wplus] = shift_split(w);
  const linalg::SVDFactors svd = linalg::gram_svd(wminus, tol);
  const int r = svd.rank;

  // P = W+ V Σ^{-1}; the reduced step operator is then U^T P.
  RealMatrix p = kernels::matmul(wplus, svd.V);
  for (int i = 0; i < p.rows; ++i)
    for (int j = 0; j < r; ++j) p(i, j) /= svd.sigma[j];
  kernels::add_flops(std::uint64_t(p.rows) * r);
  const RealMatrix reduced = kernels::matmul_transA(svd.U, p);

  const linalg::ComplexEigenSystem eig = linalg::eig_general(reduced);

  DMDModel model;
  model.modes = opts.exact_modes ? kernels::real_times_complex(p, eig.vectors)
                                 : kernels::real_times_complex(svd.U, eig.vectors);
  model.eigenvalues = eig.values;
  if (opts.clamp_unstable) {
    for (complexd& lam : model.eigenvalues) {
      const double mod = std::abs(lam);
      if (mod > 1.0 + 1e-6) lam /= mod;
    }
  }

  std::vector<double> anchor(w.rows);
  for (int i = 0; i < w.rows; ++i) anchor[i] = w(i, w.cols - 1);
  model.amplitudes = opts.ls_amplitudes
                         ? least_squares_amplitudes(model.modes, anchor)
                         : kernels::conj_transpose_times_real(model.modes, anchor);
  model.rank = r;
  model.snapshot_count = w.cols;
  model.fit_flops = kernels::thread_flops() - flops0;
  return model;
}

std::vector<double> extrapolate(const DMDModel& model, const std::vector<double>& anchor,
                                long steps) {
  require(steps >= 0, "extrapolate: steps must be non-negative");
  require(int(anchor.size()) == model.modes.rows, "extrapolate: anchor length mismatch");

  const int r = model.rank;
  double max_mod = 0.0;
  std::vector<complexd> coeff(r);
  for (int j = 0; j < r; ++j) {
    max_mod = std::max(max_mod, std::abs(model.eigenvalues[j]));
    coeff[j] = cpow_int(model.eigenvalues[j], steps) * model.amplitudes[j];
  }
  for (const complexd& c : coeff) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      std::ostringstream os;
      os << "divergent DMD extrapolation; max |lambda| = " << max_mod << ", steps = " << steps;
      throw numeric_error(os.str());
    }
  }

  const std::vector<complexd> y = kernels::complex_matvec(model.modes, coeff);
  double re2 = 0.0, im2 = 0.0;
  for (const complexd& v : y) {
    re2 += v.real() * v.real();
    im2 += v.imag() * v.imag();
  }
  // The spectrum is conjugate-closed, so the imaginary part is roundoff;
  // verify before discarding it.
  const double scale = std::max(std::sqrt(re2), vector_norm2(anchor));
  if (std::sqrt(im2) > 1e-8 * std::max(scale, 1e-300))
    throw numeric_error("non-real DMD extrapolation; conjugate symmetry lost");

  std::vector<double> out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = y[i].real();
  if (!all_finite(out)) {
    std::ostringstream os;
    os << "divergent DMD extrapolation; max |lambda| = " << max_mod << ", steps = " << steps;
    throw numeric_error(os.str());
  }
  return out;
}

}  // namespace dmdtrain::dmd
