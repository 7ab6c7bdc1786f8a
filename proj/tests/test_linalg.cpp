#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "dmdtrain/errors.hpp"
#include "dmdtrain/kernels.hpp"
#include "dmdtrain/linalg.hpp"
#include "oracles.hpp"

using namespace dmdtrain;
namespace la = dmdtrain::linalg;

namespace {

RealMatrix from_rows(int r, int c, std::initializer_list<double> vals) {
  RealMatrix m(r, c);
  std::copy(vals.begin(), vals.end(), m.data.begin());
  return m;
}

double ortho_residual(const RealMatrix& u) {
  RealMatrix g = kernels::gram(u);
  double s = 0.0;
  for (int i = 0; i < g.rows; ++i)
    for (int j = 0; j < g.cols; ++j) {
      const double d = g(i, j) - (i == j ? 1.0 : 0.0);
      s += d * d;
    }
  return std::sqrt(s);
}

double reconstruction_error(const RealMatrix& w, const la::SVDFactors& f) {
  RealMatrix us = f.U;
  for (int i = 0; i < us.rows; ++i)
    for (int j = 0; j < us.cols; ++j) us(i, j) *= f.sigma[j];
  RealMatrix rec = kernels::matmul_transB(us, f.V);
  double s = 0.0;
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    const double d = rec.data[i] - w.data[i];
    s += d * d;
  }
  return std::sqrt(s) / frobenius_norm(w);
}

}  // namespace

TEST_CASE("select_rank applies the ratio rule") {
  CHECK(la::select_rank({10.0, 1.0, 1e-12}, 1e-10) == 2);
  CHECK(la::select_rank({7.0}, 1e-10) == 1);
  CHECK(la::select_rank({5.0, 5.0, 5.0}, 1e-10) == 3);
  CHECK_THROWS_WITH_AS((void)la::select_rank({0.0, 0.0}, 1e-10), "zero leading singular value",
                       numeric_error);
  CHECK_THROWS_AS((void)la::select_rank({3.0, 4.0}, 1e-10), std::invalid_argument);
}

TEST_CASE("gram_svd on a diagonal-singular-value matrix") {
  RealMatrix w = from_rows(3, 2, {3, 0, 0, 4, 0, 0});
  la::SVDFactors f = la::gram_svd(w, 1e-10);
  REQUIRE(f.rank == 2);
  CHECK(f.sigma[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(f.sigma[1] == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("gram_svd detects a rank-1 outer product") {
  RealMatrix w = from_rows(2, 2, {1, 2, 2, 4});
  la::SVDFactors f = la::gram_svd(w, 1e-10);
  REQUIRE(f.rank == 1);
  CHECK(f.sigma[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(ortho_residual(f.U) < 1e-10);
}

TEST_CASE("gram_svd singular values match the one-sided Jacobi oracle") {
  std::mt19937_64 rng(42);
  RealMatrix w = oracles::random_matrix(8, 4, rng);
  la::SVDFactors f = la::gram_svd(w, 1e-10);
  const std::vector<double> ref = oracles::jacobi_svd_singular_values(w);
  REQUIRE(f.rank == 4);
  for (int i = 0; i < 4; ++i) CHECK(std::fabs(f.sigma[i] - ref[i]) < 1e-10);
}

TEST_CASE("gram_svd error paths") {
  RealMatrix zero(4, 2);
  CHECK_THROWS_WITH_AS((void)la::gram_svd(zero, 1e-10), "degenerate snapshot matrix",
                       numeric_error);
  RealMatrix bad = from_rows(2, 1, {1.0, std::nan("")});
  CHECK_THROWS_AS((void)la::gram_svd(bad, 1e-10), numeric_error);
  RealMatrix ok(3, 2);
  ok(0, 0) = 1.0;
  CHECK_THROWS_AS((void)la::gram_svd(ok, 2.0), std::invalid_argument);
}

TEST_CASE("gram_svd caps the rank of a wide matrix at its row count") {
  // tall orientation is the intended use, but wide inputs appear when a
  // layer has fewer parameters than stored snapshots
  std::mt19937_64 rng(8);
  RealMatrix w = oracles::random_matrix(3, 7, rng);
  la::SVDFactors f = la::gram_svd(w, 1e-12);
  CHECK(f.rank == 3);
  CHECK(ortho_residual(f.U) < 1e-10);
  CHECK(reconstruction_error(w, f) < 1e-8);
  const std::vector<double> ref = oracles::jacobi_svd_singular_values(w);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(f.sigma[i] - ref[i]) < 1e-9);
}

TEST_CASE("gram_svd invariants hold over a seeded corpus") {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<int> rows(12, 200), cols(2, 20);
  for (int trial = 0; trial < 25; ++trial) {
    int n = rows(rng), m = cols(rng);
    if (n < m) std::swap(n, m);
    if (n < m + 2) n = m + 2;
    RealMatrix w = oracles::random_matrix(n, m, rng);
    la::SVDFactors f = la::gram_svd(w, 1e-12);
    CHECK(ortho_residual(f.U) < 1e-10);
    CHECK(ortho_residual(f.V) < 1e-10);
    CHECK(reconstruction_error(w, f) < 1e-8);
    const std::vector<double> ref = oracles::jacobi_svd_singular_values(w);
    for (int i = 0; i < f.rank; ++i) CHECK(std::fabs(f.sigma[i] - ref[i]) < 1e-9);
    for (int i = 1; i < f.rank; ++i) CHECK(f.sigma[i] <= f.sigma[i - 1]);
  }
}

TEST_CASE("sign convention makes gram_svd deterministic") {
  std::mt19937_64 rng(5);
  RealMatrix w = oracles::random_matrix(30, 6, rng);
  la::SVDFactors f1 = la::gram_svd(w, 1e-10);
  la::SVDFactors f2 = la::gram_svd(w, 1e-10);
  for (std::size_t i = 0; i < f1.U.data.size(); ++i) CHECK(f1.U.data[i] == f2.U.data[i]);
  for (int j = 0; j < f1.rank; ++j) {
    int imax = 0;
    for (int i = 1; i < f1.V.rows; ++i)
      if (std::fabs(f1.V(i, j)) > std::fabs(f1.V(imax, j))) imax = i;
    CHECK(f1.V(imax, j) > 0.0);
  }
}

TEST_CASE("eig_general on a diagonal matrix") {
  RealMatrix a = from_rows(2, 2, {0.9, 0, 0, 0.5});
  la::ComplexEigenSystem sys = la::eig_general(a);
  CHECK(sys.values[0].real() == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(sys.values[1].real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(sys.values[0].imag() == 0.0);
  CHECK(sys.values[1].imag() == 0.0);
}

TEST_CASE("eig_general on a rotation matrix gives an exact conjugate pair") {
  RealMatrix a = from_rows(2, 2, {0, -1, 1, 0});
  la::ComplexEigenSystem sys = la::eig_general(a);
  CHECK(sys.values[0].real() == doctest::Approx(0.0));
  CHECK(sys.values[0].imag() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(sys.values[1] == std::conj(sys.values[0]));
}

namespace {

double eig_pair_residual(const RealMatrix& a, const la::ComplexEigenSystem& sys, int j) {
  const int n = a.rows;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    complexd acc(0.0, 0.0);
    for (int k = 0; k < n; ++k) acc += a(i, k) * sys.vectors(k, j);
    acc -= sys.values[j] * sys.vectors(i, j);
    s += std::norm(acc);
  }
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("eig_general meets the residual, trace, and determinant contracts") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2 + trial % 5;
    RealMatrix a = oracles::random_matrix(n, n, rng);
    la::ComplexEigenSystem sys = la::eig_general(a);
    const double anorm = frobenius_norm(a);

    complexd sum(0.0, 0.0), prod(1.0, 0.0);
    for (int j = 0; j < n; ++j) {
      sum += sys.values[j];
      prod *= sys.values[j];
      CHECK(eig_pair_residual(a, sys, j) <= 1e-8 * anorm);
      double norm2 = 0.0;
      for (int i = 0; i < n; ++i) norm2 += std::norm(sys.vectors(i, j));
      CHECK(std::sqrt(norm2) == doctest::Approx(1.0).epsilon(1e-10));
    }
    double trace = 0.0;
    for (int i = 0; i < n; ++i) trace += a(i, i);
    CHECK(std::fabs(sum.real() - trace) <= 1e-10 * std::max(1.0, anorm));
    CHECK(std::fabs(sum.imag()) <= 1e-12 * std::max(1.0, anorm));
    if (n <= 6) {
      const double det = oracles::determinant(a);
      CHECK(prod.real() == doctest::Approx(det).epsilon(1e-8));
    }

    // conjugate closure holds exactly
    std::vector<complexd> vals = sys.values;
    for (const complexd& v : vals) {
      if (v.imag() == 0.0) continue;
      CHECK(std::count(vals.begin(), vals.end(), std::conj(v)) >= 1);
    }
  }
}

TEST_CASE("eig_general recovers a constructed spectrum") {
  std::mt19937_64 rng(2024);
  const std::vector<double> real_eigs = {0.95, -0.4, 0.1};
  const std::vector<complexd> pairs = {complexd(0.6, 0.3)};
  for (bool normal : {true, false}) {
    RealMatrix a = normal ? oracles::normal_matrix_with_spectrum(5, real_eigs, pairs, rng)
                          : oracles::nonnormal_matrix_with_spectrum(5, real_eigs, pairs, rng);
    la::ComplexEigenSystem sys = la::eig_general(a);
    std::vector<complexd> expect = {complexd(0.95, 0), complexd(-0.4, 0), complexd(0.1, 0),
                                    complexd(0.6, 0.3), complexd(0.6, -0.3)};
    CHECK(oracles::spectrum_distance(sys.values, expect) < 1e-9);
  }
}

TEST_CASE("eig_general sorts by modulus then real part") {
  RealMatrix a = from_rows(3, 3, {0.5, 0, 0, 0, -0.9, 0, 0, 0, 0.9});
  la::ComplexEigenSystem sys = la::eig_general(a);
  CHECK(sys.values[0].real() == doctest::Approx(0.9));
  CHECK(sys.values[1].real() == doctest::Approx(-0.9));
  CHECK(sys.values[2].real() == doctest::Approx(0.5));
}

TEST_CASE("jacobi_symmetric_eig diagonalizes a symmetric matrix") {
  std::mt19937_64 rng(17);
  RealMatrix b = oracles::random_matrix(7, 7, rng);
  RealMatrix a(7, 7);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j) a(i, j) = 0.5 * (b(i, j) + b(j, i));
  std::vector<double> evals;
  RealMatrix evecs;
  la::jacobi_symmetric_eig(a, evals, evecs);
  for (int j = 0; j < 7; ++j) {
    for (int i = 0; i < 7; ++i) {
      double av = 0.0;
      for (int kk = 0; kk < 7; ++kk) av += a(i, kk) * evecs(kk, j);
      CHECK(av == doctest::Approx(evals[j] * evecs(i, j)).epsilon(1e-9).scale(1.0));
    }
  }
  for (int j = 1; j < 7; ++j) CHECK(evals[j] <= evals[j - 1]);
}
