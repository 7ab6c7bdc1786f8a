#include "dmdtrain/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dmdtrain/errors.hpp"
#include "dmdtrain/kernels.hpp"

namespace dmdtrain::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void jacobi_symmetric_eig(const RealMatrix& a_in, std::vector<double>& eigenvalues,
                          RealMatrix& eigenvectors) {
  require(a_in.rows == a_in.cols && a_in.rows >= 1, "jacobi_symmetric_eig: square input required");
  const int n = a_in.rows;
  RealMatrix a = a_in;
  RealMatrix v = identity_matrix(n);
  const double normf = frobenius_norm(a);

  std::uint64_t rotations = 0;
  if (normf > 0.0) {
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      double off2 = 0.0;
      for (int p = 0; p < n; ++p)
        for (int q = p + 1; q < n; ++q) off2 += a(p, q) * a(p, q);
      if (std::sqrt(2.0 * off2) <= 1e-14 * normf) break;

      for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
          const double c = 1.0 / std::sqrt(1.0 + t * t);
          const double s = t * c;
          ++rotations;

          const double app = a(p, p);
          const double aqq = a(q, q);
          a(p, p) = app - t * apq;
          a(q, q) = aqq + t * apq;
          a(p, q) = a(q, p) = 0.0;
          for (int k = 0; k < n; ++k) {
            if (k == p || k == q) continue;
            const double akp = a(k, p);
            const double akq = a(k, q);
            a(k, p) = a(p, k) = c * akp - s * akq;
            a(k, q) = a(q, k) = s * akp + c * akq;
          }
          for (int k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }
  kernels::add_flops(rotations * 12ull * n);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) > a(j, j); });

  eigenvalues.resize(n);
  eigenvectors = RealMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    eigenvalues[j] = a(order[j], order[j]);
    for (int i = 0; i < n; ++i) eigenvectors(i, j) = v(i, order[j]);
  }
}

int select_rank(const std::vector<double>& sigma, double tol) {
  require(!sigma.empty(), "select_rank: empty sigma");
  require(tol > 0.0 && tol < 1.0, "select_rank: tol must lie in (0,1)");
  for (std::size_t i = 1; i < sigma.size(); ++i)
    require(sigma[i] <= sigma[i - 1] && sigma[i] >= 0.0, "select_rank: sigma must be descending and non-negative");
  if (!(sigma[0] > 0.0)) throw numeric_error("zero leading singular value");
  int r = 0;
  for (double s : sigma)
    if (s / sigma[0] > tol) ++r;
  return r;
}

SVDFactors gram_svd(const RealMatrix& w, double tol) {
  require(w.rows >= 1 && w.cols >= 1, "gram_svd: empty input");
  require(tol > 0.0 && tol < 1.0, "gram_svd: tol must lie in (0,1)");
  if (!all_finite(w)) throw numeric_error("gram_svd: non-finite entries");
  if (frobenius_norm(w) == 0.0) throw numeric_error("degenerate snapshot matrix");

  const int m = w.cols;
  RealMatrix g = kernels::gram(w);
  std::vector<double> evals;
  RealMatrix evecs;
  jacobi_symmetric_eig(g, evals, evecs);

  // Gram eigenvalues below the formation/iteration noise floor are
  // numerically zero; keeping them would inject sqrt(eps)-scale junk
  // singular values (the resolution limit of the squared formulation).
  const double lam_floor =
      evals[0] * kEps * std::max({double(m), 16.0, std::sqrt(double(w.rows))});
  std::vector<double> sigma(m);
  for (int i = 0; i < m; ++i)
    sigma[i] = evals[i] > lam_floor ? std::sqrt(evals[i]) : 0.0;
  for (int i = 1; i < m; ++i)
    if (sigma[i] < sigma[0] * 1e-14) sigma[i] = 0.0;
  if (!(sigma[0] > 0.0)) throw numeric_error("degenerate snapshot matrix");

  const int r = select_rank(sigma, tol);

  RealMatrix v(m, r);
  for (int j = 0; j < r; ++j) {
    int imax = 0;
    for (int i = 1; i < m; ++i)
      if (std::fabs(evecs(i, j)) > std::fabs(evecs(imax, j))) imax = i;
    const double flip = evecs(imax, j) < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < m; ++i) v(i, j) = flip * evecs(i, j);
  }

  RealMatrix u = kernels::matmul(w, v);
  for (int i = 0; i < u.rows; ++i)
    for (int j = 0; j < r; ++j) u(i, j) /= sigma[j];
  kernels::add_flops(std::uint64_t(u.rows) * r);

  SVDFactors f;
  f.U = std::move(u);
  f.V = std::move(v);
  f.sigma.assign(sigma.begin(), sigma.begin() + r);
  f.rank = r;
  return f;
}

namespace {

// Householder reduction to upper Hessenberg form (returns H; the similarity
// transform is not accumulated — eigenvectors come from inverse iteration).
RealMatrix hessenberg_reduce(RealMatrix a) {
  const int n = a.rows;
  std::vector<double> v(n);
  for (int k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (int i = k + 1; i < n; ++i) xnorm += a(i, k) * a(i, k);
    xnorm = std::sqrt(xnorm);
    if (xnorm == 0.0) continue;
    const double alpha = a(k + 1, k) >= 0.0 ? -xnorm : xnorm;
    std::fill(v.begin(), v.end(), 0.0);
    for (int i = k + 1; i < n; ++i) v[i] = a(i, k);
    v[k + 1] -= alpha;
    double vtv = 0.0;
    for (int i = k + 1; i < n; ++i) vtv += v[i] * v[i];
    if (vtv == 0.0) continue;
    const double beta = 2.0 / vtv;

    for (int j = k; j < n; ++j) {
      double s = 0.0;
      for (int i = k + 1; i < n; ++i) s += v[i] * a(i, j);
      s *= beta;
      for (int i = k + 1; i < n; ++i) a(i, j) -= s * v[i];
    }
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      s *= beta;
      for (int j = k + 1; j < n; ++j) a(i, j) -= s * v[j];
    }
    a(k + 1, k) = alpha;
    for (int i = k + 2; i < n; ++i) a(i, k) = 0.0;
  }
  return a;
}

// Francis double-shift QR on an upper Hessenberg matrix; eigenvalues only.
// Complex pairs are emitted with exactly conjugate entries, adjacent in the
// output. Returns false when the iteration budget is exhausted; *achieved
// reports the last subdiagonal magnitude under work.
bool hessenberg_qr_eigenvalues(RealMatrix& h, std::vector<complexd>& out, int max_iters,
                               double* achieved) {
  const int n = h.rows;
  out.assign(n, complexd(0.0, 0.0));
  *achieved = 0.0;

  double hnorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - 1); j < n; ++j) hnorm += std::fabs(h(i, j));
  if (hnorm == 0.0) return true;

  int en = n - 1;
  double t = 0.0;
  int itn = max_iters;
  int its = 0;
  double p = 0.0, q = 0.0, r = 0.0;

  while (en >= 0) {
    int l;
    for (l = en; l > 0; --l) {
      double s = std::fabs(h(l - 1, l - 1)) + std::fabs(h(l, l));
      if (s == 0.0) s = hnorm;
      if (std::fabs(h(l, l - 1)) <= kEps * s) {
        h(l, l - 1) = 0.0;
        break;
      }
    }

    double x = h(en, en);
    if (l == en) {
      out[en] = complexd(x + t, 0.0);
      --en;
      its = 0;
      continue;
    }

    const int na = en - 1;
    double y = h(na, na);
    double w = h(en, na) * h(na, en);
    if (l == na) {
      p = (y - x) / 2.0;
      q = p * p + w;
      double zz = std::sqrt(std::fabs(q));
      x += t;
      if (q >= 0.0) {
        zz = p + (p >= 0.0 ? zz : -zz);
        const double l1 = x + zz;
        const double l2 = zz != 0.0 ? x - w / zz : l1;
        out[na] = complexd(l1, 0.0);
        out[en] = complexd(l2, 0.0);
      } else {
        out[na] = complexd(x + p, zz);
        out[en] = complexd(x + p, -zz);
      }
      en -= 2;
      its = 0;
      continue;
    }

    if (itn <= 0) {
      *achieved = std::fabs(h(en, en - 1));
      return false;
    }
    if (its == 10 || its == 20) {
      t += x;
      for (int i = 0; i <= en; ++i) h(i, i) -= x;
      const double s = std::fabs(h(en, na)) + std::fabs(h(na, na - 1));
      x = y = 0.75 * s;
      w = -0.4375 * s * s;
    }
    ++its;
    --itn;

    const int enm2 = na - 1;
    int m;
    for (m = enm2; m >= l; --m) {
      const double zz = h(m, m);
      r = x - zz;
      double s = y - zz;
      p = (r * s - w) / h(m + 1, m) + h(m, m + 1);
      q = h(m + 1, m + 1) - zz - r - s;
      r = h(m + 2, m + 1);
      s = std::fabs(p) + std::fabs(q) + std::fabs(r);
      p /= s;
      q /= s;
      r /= s;
      if (m == l) break;
      const double tst1 =
          std::fabs(p) * (std::fabs(h(m - 1, m - 1)) + std::fabs(zz) + std::fabs(h(m + 1, m + 1)));
      const double tst2 = tst1 + std::fabs(h(m, m - 1)) * (std::fabs(q) + std::fabs(r));
      if (tst2 == tst1) break;
    }
    for (int i = m + 2; i <= en; ++i) h(i, i - 2) = 0.0;
    for (int i = m + 3; i <= en; ++i) h(i, i - 3) = 0.0;

    for (int k = m; k <= na; ++k) {
      const bool notlast = k != na;
      if (k != m) {
        p = h(k, k - 1);
        q = h(k + 1, k - 1);
        r = notlast ? h(k + 2, k - 1) : 0.0;
        x = std::fabs(p) + std::fabs(q) + std::fabs(r);
        if (x == 0.0) continue;
        p /= x;
        q /= x;
        r /= x;
      }
      double s = std::sqrt(p * p + q * q + r * r);
      if (p < 0.0) s = -s;
      if (k != m)
        h(k, k - 1) = -s * x;
      else if (l != m)
        h(k, k - 1) = -h(k, k - 1);
      p += s;
      x = p / s;
      y = q / s;
      const double zz = r / s;
      q /= p;
      r /= p;

      if (notlast) {
        for (int j = k; j <= en; ++j) {
          double pp = h(k, j) + q * h(k + 1, j) + r * h(k + 2, j);
          h(k, j) -= pp * x;
          h(k + 1, j) -= pp * y;
          h(k + 2, j) -= pp * zz;
        }
        const int imax = std::min(en, k + 3);
        for (int i = l; i <= imax; ++i) {
          double pp = x * h(i, k) + y * h(i, k + 1) + zz * h(i, k + 2);
          h(i, k) -= pp;
          h(i, k + 1) -= pp * q;
          h(i, k + 2) -= pp * r;
        }
      } else {
        for (int j = k; j <= en; ++j) {
          double pp = h(k, j) + q * h(k + 1, j);
          h(k, j) -= pp * x;
          h(k + 1, j) -= pp * y;
        }
        const int imax = std::min(en, k + 3);
        for (int i = l; i <= imax; ++i) {
          double pp = x * h(i, k) + y * h(i, k + 1);
          h(i, k) -= pp;
          h(i, k + 1) -= pp * q;
        }
      }
    }
  }
  return true;
}

struct ComplexLU {
  ComplexMatrix lu;
  std::vector<int> piv;

  std::vector<complexd> solve(std::vector<complexd> b) const {
    const int n = lu.rows;
    for (int k = 0; k < n; ++k) {
      std::swap(b[k], b[piv[k]]);
      for (int i = k + 1; i < n; ++i) b[i] -= lu(i, k) * b[k];
    }
    for (int k = n - 1; k >= 0; --k) {
      for (int j = k + 1; j < n; ++j) b[k] -= lu(k, j) * b[j];
      b[k] /= lu(k, k);
    }
    return b;
  }
};

// LU of (A - lambda I) with partial pivoting; near-zero pivots are replaced
// by eps*scale so inverse iteration can exploit the near-singularity.
ComplexLU factor_shifted(const RealMatrix& a, complexd lambda, double scale) {
  const int n = a.rows;
  ComplexLU f;
  f.lu = ComplexMatrix(n, n);
  f.piv.assign(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      f.lu(i, j) = complexd(a(i, j), 0.0) - (i == j ? lambda : complexd(0.0, 0.0));

  const double tiny = std::max(kEps * scale, std::numeric_limits<double>::min());
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(f.lu(i, k)) > std::abs(f.lu(p, k))) p = i;
    f.piv[k] = p;
    if (p != k)
      for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
    if (std::abs(f.lu(k, k)) < tiny) f.lu(k, k) = complexd(tiny, 0.0);
    for (int i = k + 1; i < n; ++i) {
      f.lu(i, k) /= f.lu(k, k);
      for (int j = k + 1; j < n; ++j) f.lu(i, j) -= f.lu(i, k) * f.lu(k, j);
    }
  }
  return f;
}

double vec_norm(const std::vector<complexd>& v) {
  double s = 0.0;
  for (const complexd& x : v) s += std::norm(x);
  return std::sqrt(s);
}

double eig_residual(const RealMatrix& a, complexd lambda, const std::vector<complexd>& v) {
  const int n = a.rows;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    complexd acc(0.0, 0.0);
    for (int j = 0; j < n; ++j) acc += a(i, j) * v[j];
    acc -= lambda * v[i];
    s += std::norm(acc);
  }
  return std::sqrt(s);
}

void phase_normalize(std::vector<complexd>& v) {
  int imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = int(i);
  const double mag = std::abs(v[imax]);
  if (mag == 0.0) return;
  const complexd phase = std::conj(v[imax]) / mag;
  for (complexd& x : v) x *= phase;
  v[imax] = complexd(std::abs(v[imax]), 0.0);  // kill roundoff in the pivot entry
}

// Inverse iteration for one eigenvalue. Returns the best vector found and its
// residual; the caller enforces the residual contract.
std::pair<std::vector<complexd>, double> inverse_iteration(const RealMatrix& a, complexd lambda,
                                                           double anorm) {
  const int n = a.rows;
  const ComplexLU f = factor_shifted(a, lambda, anorm + std::abs(lambda));
  std::vector<complexd> best;
  double best_resid = std::numeric_limits<double>::infinity();

  for (int attempt = 0; attempt < 3 + n; ++attempt) {
    std::vector<complexd> v(n);
    if (attempt == 0) {
      for (int i = 0; i < n; ++i) v[i] = complexd(1.0 + 0.5 * std::sin(double(i) + 1.0), 0.0);
    } else {
      for (int i = 0; i < n; ++i) v[i] = complexd(i == (attempt - 1) % n ? 1.0 : 0.0, 0.0);
    }
    double nv = vec_norm(v);
    for (complexd& x : v) x /= nv;

    for (int iter = 0; iter < 4; ++iter) {
      std::vector<complexd> w = f.solve(v);
      const double nw = vec_norm(w);
      if (!(nw > 0.0) || !std::isfinite(nw)) break;
      for (complexd& x : w) x /= nw;
      v = w;
      const double resid = eig_residual(a, lambda, v);
      if (resid < best_resid) {
        best_resid = resid;
        best = v;
      }
      if (resid <= 0.25e-8 * std::max(anorm, 1e-300)) return {best, best_resid};
    }
    if (best_resid <= 1e-8 * std::max(anorm, 1e-300)) break;
  }
  return {best, best_resid};
}

}  // namespace

ComplexEigenSystem eig_general(const RealMatrix& a) {
  require(a.rows == a.cols && a.rows >= 1, "eig_general: square input required");
  if (!all_finite(a)) throw numeric_error("eig_general: non-finite entries");
  const int n = a.rows;
  const double anorm = frobenius_norm(a);

  ComplexEigenSystem sys;
  if (n == 1) {
    sys.values = {complexd(a(0, 0), 0.0)};
    sys.vectors = ComplexMatrix(1, 1);
    sys.vectors(0, 0) = complexd(1.0, 0.0);
    return sys;
  }

  RealMatrix h = hessenberg_reduce(a);
  std::vector<complexd> raw;
  double achieved = 0.0;
  if (!hessenberg_qr_eigenvalues(h, raw, 100 * n, &achieved)) {
    std::ostringstream os;
    os << "eig_general: QR iteration failed to converge within budget; "
       << "remaining subdiagonal magnitude " << achieved;
    throw numeric_error(os.str());
  }
  kernels::add_flops(30ull * n * n * n);  // nominal O(n^3) tally for the QR phase

  // Group conjugate pairs (adjacent by construction) so sorting keeps them
  // together even when distinct pairs share a modulus.
  struct Group {
    complexd first;
    bool pair;
  };
  std::vector<Group> groups;
  for (int i = 0; i < n;) {
    if (raw[i].imag() != 0.0 && i + 1 < n && raw[i + 1] == std::conj(raw[i])) {
      groups.push_back({raw[i].imag() > 0.0 ? raw[i] : raw[i + 1], true});
      i += 2;
    } else {
      groups.push_back({raw[i], false});
      ++i;
    }
  }
  std::stable_sort(groups.begin(), groups.end(), [](const Group& g1, const Group& g2) {
    const double m1 = std::abs(g1.first), m2 = std::abs(g2.first);
    if (m1 != m2) return m1 > m2;
    return g1.first.real() > g2.first.real();
  });

  sys.values.clear();
  for (const Group& g : groups) {
    sys.values.push_back(g.first);
    if (g.pair) sys.values.push_back(std::conj(g.first));
  }

  sys.vectors = ComplexMatrix(n, n);
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const complexd lambda = sys.values[j];
    if (lambda.imag() < 0.0 && j > 0 && sys.values[j - 1] == std::conj(lambda)) {
      for (int i = 0; i < n; ++i) sys.vectors(i, j) = std::conj(sys.vectors(i, j - 1));
      continue;
    }
    auto [vec, resid] = inverse_iteration(a, lambda, anorm);
    worst = std::max(worst, resid);
    if (vec.empty() || resid > 1e-8 * std::max(anorm, 1e-300)) {
      std::ostringstream os;
      os << "eig_general: eigenvector residual " << resid << " exceeds contract for eigenvalue ("
         << lambda.real() << ", " << lambda.imag() << ")";
      throw numeric_error(os.str());
    }
    phase_normalize(vec);
    for (int i = 0; i < n; ++i) sys.vectors(i, j) = vec[i];
  }
  return sys;
}

}  // namespace dmdtrain::linalg
