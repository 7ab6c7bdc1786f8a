#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dmdtrain/adr.hpp"
#include "dmdtrain/errors.hpp"

namespace dmdtrain::adr {

namespace {

struct State {
  double f, fp, fpp;
};

// Similarity form consistent with eta = sqrt(U0/(2 nu x)) y: f''' + f f'' = 0,
// flat-plate curvature f''(0) = 0.4696.
inline State rhs(const State& s) { return {s.fp, s.fpp, -s.f * s.fpp}; }

inline State axpy(const State& a, double h, const State& b) {
  return {a.f + h * b.f, a.fp + h * b.fp, a.fpp + h * b.fpp};
}

constexpr double kBlowupLimit = 1e8;

// RK4 integration of the similarity ODE. Fills the solution arrays when out
// is non-null. Returns the end value of f' (clamped when the trajectory
// blows up, preserving the sign for bracketing).
double integrate(double f0, double fp0, double fpp0, double eta_max, int n_eta,
                 BlasiusSolution* out) {
  const double h = eta_max / n_eta;
  State s{f0, fp0, fpp0};
  if (out) {
    out->eta.assign(n_eta + 1, 0.0);
    out->f.assign(n_eta + 1, 0.0);
    out->fp.assign(n_eta + 1, 0.0);
    out->fpp.assign(n_eta + 1, 0.0);
    out->eta[0] = 0.0;
    out->f[0] = s.f;
    out->fp[0] = s.fp;
    out->fpp[0] = s.fpp;
  }
  for (int k = 0; k < n_eta; ++k) {
    const State k1 = rhs(s);
    const State k2 = rhs(axpy(s, 0.5 * h, k1));
    const State k3 = rhs(axpy(s, 0.5 * h, k2));
    const State k4 = rhs(axpy(s, h, k3));
    s.f += h / 6.0 * (k1.f + 2.0 * k2.f + 2.0 * k3.f + k4.f);
    s.fp += h / 6.0 * (k1.fp + 2.0 * k2.fp + 2.0 * k3.fp + k4.fp);
    s.fpp += h / 6.0 * (k1.fpp + 2.0 * k2.fpp + 2.0 * k3.fpp + k4.fpp);
    if (!std::isfinite(s.fp) || !std::isfinite(s.fpp) || std::fabs(s.fp) > kBlowupLimit ||
        std::fabs(s.fpp) > kBlowupLimit) {
      double sign = 1.0;
      if (std::isfinite(s.fp))
        sign = s.fp >= 0.0 ? 1.0 : -1.0;
      else if (std::isfinite(s.fpp))
        sign = s.fpp >= 0.0 ? 1.0 : -1.0;
      else
        sign = fpp0 >= 0.0 ? 1.0 : -1.0;
      if (out) out->eta.clear();  // partial fill is useless
      return sign * kBlowupLimit;
    }
    if (out) {
      out->eta[k + 1] = (k + 1) * h;
      out->f[k + 1] = s.f;
      out->fp[k + 1] = s.fp;
      out->fpp[k + 1] = s.fpp;
    }
  }
  return s.fp;
}

}  // namespace

BlasiusSolution solve_blasius(const ADRParams& p, double eta_max, int n_eta) {
  if (!(p.U0 > 0.0)) throw std::invalid_argument("solve_blasius: U0 must be > 0");
  if (!(p.nu > 0.0)) throw std::invalid_argument("solve_blasius: nu must be > 0");
  if (!(eta_max >= 8.0)) throw std::invalid_argument("solve_blasius: eta_max must be >= 8");
  if (n_eta < 200) throw std::invalid_argument("solve_blasius: n_eta must be >= 200");

  const double f0 = -2.0 * p.uv / std::sqrt(p.nu * p.U0);
  const double fp0 = p.uh / p.U0;

  auto miss = [&](double fpp0) { return integrate(f0, fp0, fpp0, eta_max, n_eta, nullptr) - 1.0; };

  // Bracket the shot on a coarse scan of f''(0) in [-5, 5].
  const int scan = 40;
  double lo = 0.0, hi = 0.0, glo = 0.0, ghi = 0.0;
  bool bracketed = false;
  double prev_x = -5.0;
  double prev_g = miss(prev_x);
  if (prev_g == 0.0) {
    lo = hi = prev_x;
    glo = ghi = 0.0;
    bracketed = true;
  }
  for (int k = 1; k <= scan && !bracketed; ++k) {
    const double x = -5.0 + 10.0 * k / scan;
    const double g = miss(x);
    if (g == 0.0) {
      lo = hi = x;
      glo = ghi = 0.0;
      bracketed = true;
      break;
    }
    if (prev_g < 0.0 && g > 0.0) {
      lo = prev_x;
      hi = x;
      glo = prev_g;
      ghi = g;
      bracketed = true;
      break;
    }
    prev_x = x;
    prev_g = g;
  }
  if (!bracketed) {
    std::ostringstream os;
    os << "shooting bracket failed: f'(eta_max)-1 spans [" << miss(-5.0) << ", " << miss(5.0)
       << "] over f''(0) in [-5, 5]";
    throw numeric_error(os.str());
  }

  // Secant refinement inside the bracket, bisection fallback when the secant
  // step leaves it or stalls.
  double root = lo, groot = glo;
  if (glo == 0.0 && lo == hi) {
    root = lo;
    groot = 0.0;
  } else {
    const double tol = 1e-11;
    for (int it = 0; it < 200; ++it) {
      double x;
      if (ghi != glo) {
        x = hi - ghi * (hi - lo) / (ghi - glo);
        if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
      } else {
        x = 0.5 * (lo + hi);
      }
      const double g = miss(x);
      if (std::fabs(g) <= tol || hi - lo <= 1e-15 * std::max(1.0, std::fabs(lo))) {
        root = x;
        groot = g;
        break;
      }
      if (g < 0.0) {
        lo = x;
        glo = g;
      } else {
        hi = x;
        ghi = g;
      }
      root = x;
      groot = g;
    }
    if (std::fabs(groot) > 1e-8) {
      std::ostringstream os;
      os << "shooting failed to reach tolerance: |f'(eta_max)-1| = " << std::fabs(groot);
      throw numeric_error(os.str());
    }
  }

  BlasiusSolution sol;
  sol.eta_max = eta_max;
  sol.fpp0 = root;
  integrate(f0, fp0, root, eta_max, n_eta, &sol);
  if (sol.eta.empty()) throw numeric_error("solve_blasius: converged shot re-integration diverged");
  return sol;
}

Velocity velocity_at(double x, double y, const BlasiusSolution& blasius, const ADRParams& p,
                     bool paper_uy) {
  if (!(x > 0.0)) throw std::invalid_argument("upstream of plate origin");
  const double eta = std::sqrt(p.U0 / (2.0 * p.nu * x)) * y;

  double f, fp;
  const int n = int(blasius.eta.size()) - 1;
  if (eta >= blasius.eta_max) {
    // Free stream: f' = 1, f continues linearly, so eta f' - f is constant.
    fp = 1.0;
    f = blasius.f[n] + (eta - blasius.eta_max);
  } else {
    const double h = blasius.eta_max / n;
    int k = int(eta / h);
    k = std::clamp(k, 0, n - 1);
    const double t = (eta - blasius.eta[k]) / h;
    f = blasius.f[k] + t * (blasius.f[k + 1] - blasius.f[k]);
    fp = blasius.fp[k] + t * (blasius.fp[k + 1] - blasius.fp[k]);
  }

  Velocity v;
  v.ux = p.U0 * fp;
  const double prefactor =
      paper_uy ? 0.5 * (p.nu * p.U0 / x) : 0.5 * std::sqrt(p.nu * p.U0 / x);
  v.uy = prefactor * (eta * fp - f);
  return v;
}

}  // namespace dmdtrain::adr
