#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "dmdtrain/adr.hpp"
#include "dmdtrain/errors.hpp"

namespace dmdtrain::adr {

void Grid::validate() const {
  if (nx < 8 || ny < 8) throw std::invalid_argument("Grid: nx and ny must be >= 8");
  if (!(x0 > 0.0)) throw std::invalid_argument("Grid: x0 must be > 0 (plate origin excluded)");
  if (!(lx > 0.0 && ly > 0.0)) throw std::invalid_argument("Grid: extents must be positive");
}

double source_q1(double x, double y, double amplitude) {
  const double dx = x - 0.1, dy = y - 0.1;
  return dx * dx + dy * dy < 0.25 ? amplitude : 0.0;
}

double source_q2(double x, double y, double amplitude) {
  const double dx = x - 0.1, dy = y - 0.3;
  return dx * dx + dy * dy < 0.25 ? amplitude : 0.0;
}

BandMatrix::BandMatrix(int n, int kl, int ku)
    : n_(n), kl_(kl), ku_(ku), ab_(std::size_t(2 * kl + ku + 1) * n, 0.0), piv_(n, 0) {}

double& BandMatrix::at(int i, int j) {
  // Stored diagonals: row offset kl+ku+i-j, valid for -(ku+kl) <= i-j <= kl
  // (the extra kl upper diagonals hold pivoting fill).
  return ab_[std::size_t(kl_ + ku_ + i - j) * n_ + j];
}

double BandMatrix::at(int i, int j) const {
  return ab_[std::size_t(kl_ + ku_ + i - j) * n_ + j];
}

void BandMatrix::add(int i, int j, double v) {
  if (i < 0 || i >= n_ || j < 0 || j >= n_ || i - j > kl_ || j - i > ku_)
    throw std::invalid_argument("BandMatrix::add: entry outside the band");
  at(i, j) += v;
}

double BandMatrix::get(int i, int j) const {
  if (i < 0 || i >= n_ || j < 0 || j >= n_ || i - j > kl_ || j - i > ku_ + kl_) return 0.0;
  return at(i, j);
}

void BandMatrix::factor() {
  for (int k = 0; k < n_; ++k) {
    const int last_row = std::min(n_ - 1, k + kl_);
    int p = k;
    for (int i = k + 1; i <= last_row; ++i)
      if (std::fabs(at(i, k)) > std::fabs(at(p, k))) p = i;
    piv_[k] = p;
    if (at(p, k) == 0.0) throw numeric_error("banded LU: singular matrix");
    const int last_col = std::min(n_ - 1, k + ku_ + kl_);
    if (p != k)
      for (int j = k; j <= last_col; ++j) std::swap(at(k, j), at(p, j));
    for (int i = k + 1; i <= last_row; ++i) {
      const double l = at(i, k) / at(k, k);
      at(i, k) = l;
      for (int j = k + 1; j <= last_col; ++j) at(i, j) -= l * at(k, j);
    }
  }
  factored_ = true;
}

std::vector<double> BandMatrix::solve(std::vector<double> rhs) const {
  if (!factored_) throw std::logic_error("BandMatrix::solve called before factor");
  if (int(rhs.size()) != n_) throw std::invalid_argument("BandMatrix::solve: rhs length mismatch");
  for (int k = 0; k < n_; ++k) {
    std::swap(rhs[k], rhs[piv_[k]]);
    const int last_row = std::min(n_ - 1, k + kl_);
    for (int i = k + 1; i <= last_row; ++i) rhs[i] -= at(i, k) * rhs[k];
  }
  for (int k = n_ - 1; k >= 0; --k) {
    const int last_col = std::min(n_ - 1, k + ku_ + kl_);
    for (int j = k + 1; j <= last_col; ++j) rhs[k] -= at(k, j) * rhs[j];
    rhs[k] /= at(k, k);
  }
  return rhs;
}

namespace {

enum class NodeKind { interior, dirichlet, bottom, outflow };

NodeKind classify(const Grid& g, int i, int j) {
  if (i == 0 || j == g.ny - 1) return NodeKind::dirichlet;  // inflow and top
  if (j == 0) return NodeKind::bottom;                      // terrain
  if (i == g.nx - 1) return NodeKind::outflow;
  return NodeKind::interior;
}

struct StencilRow {
  double diag = 0.0, west = 0.0, east = 0.0, south = 0.0, north = 0.0;
};

// Upwind advection + central diffusion + reaction coefficient a at (i, j).
StencilRow interior_row(const Grid& g, double ux, double uy, double D, double a) {
  const double dx = g.dx(), dy = g.dy();
  const double uxp = std::max(ux, 0.0), uxm = std::min(ux, 0.0);
  const double uyp = std::max(uy, 0.0), uym = std::min(uy, 0.0);
  StencilRow r;
  r.diag = a + (uxp - uxm) / dx + (uyp - uym) / dy + 2.0 * D / (dx * dx) + 2.0 * D / (dy * dy);
  r.west = -uxp / dx - D / (dx * dx);
  r.east = uxm / dx - D / (dx * dx);
  r.south = -uyp / dy - D / (dy * dy);
  r.north = uym / dy - D / (dy * dy);
  return r;
}

// Solve one linearized species equation: u·grad(c) - D lap(c) + a c = q.
std::vector<double> solve_species(const Grid& g, const std::vector<double>& ux,
                                  const std::vector<double>& uy, double D,
                                  const std::vector<double>& a, const std::vector<double>& q) {
  const int n = g.nodes();
  BandMatrix M(n, g.ny, g.ny);
  std::vector<double> rhs(n, 0.0);
  for (int i = 0; i < g.nx; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      const int k = g.index(i, j);
      switch (classify(g, i, j)) {
        case NodeKind::dirichlet:
          M.add(k, k, 1.0);
          break;
        case NodeKind::bottom:
          M.add(k, k, 1.0);
          M.add(k, g.index(i, 1), -1.0);
          break;
        case NodeKind::outflow:
          M.add(k, k, 1.0);
          M.add(k, g.index(g.nx - 2, j), -1.0);
          break;
        case NodeKind::interior: {
          const StencilRow r = interior_row(g, ux[k], uy[k], D, a[k]);
          M.add(k, k, r.diag);
          M.add(k, g.index(i - 1, j), r.west);
          M.add(k, g.index(i + 1, j), r.east);
          M.add(k, g.index(i, j - 1), r.south);
          M.add(k, g.index(i, j + 1), r.north);
          rhs[k] = q[k];
          break;
        }
      }
    }
  }
  M.factor();
  return M.solve(std::move(rhs));
}

double apply_stencil(const Grid& g, const std::vector<double>& c, int i, int j,
                     const StencilRow& r) {
  return r.diag * c[g.index(i, j)] + r.west * c[g.index(i - 1, j)] +
         r.east * c[g.index(i + 1, j)] + r.south * c[g.index(i, j - 1)] +
         r.north * c[g.index(i, j + 1)];
}

}  // namespace

Fields solve_adr(const ADRParams& p, const Grid& grid, const VelocitySampler& velocity,
                 const SolveOptions& opts, SolveReport* report) {
  grid.validate();
  if (!(p.D > 0.0)) throw std::invalid_argument("solve_adr: D must be > 0");
  if (p.K12 < 0.0 || p.K3 < 0.0) throw std::invalid_argument("solve_adr: rates must be >= 0");

  const int n = grid.nodes();
  std::vector<double> ux(n), uy(n), q1(n), q2(n);
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const int k = grid.index(i, j);
      const Velocity v = velocity(grid.x(i), grid.y(j));
      if (!std::isfinite(v.ux) || !std::isfinite(v.uy))
        throw numeric_error("solve_adr: non-finite velocity sample");
      ux[k] = v.ux;
      uy[k] = v.uy;
      q1[k] = source_q1(grid.x(i), grid.y(j), opts.q1_amplitude);
      q2[k] = source_q2(grid.x(i), grid.y(j), opts.q2_amplitude);
    }
  }

  // Reaction sign: +K12 c1 c2 consumes the reactants and feeds c3. The
  // printed form flips both.
  const double consume = opts.paper_signs ? -1.0 : 1.0;
  const double produce = opts.paper_signs ? -1.0 : 1.0;

  std::vector<double> c1(n, 0.0), c2(n, 0.0), c3(n, 0.0);
  std::vector<double> a(n), q3(n), k3coef(n, p.K3);

  Fields fields;
  int iterations = 0;
  double rel_change = 0.0, residual = 0.0;
  bool converged = false;
  for (int it = 1; it <= opts.max_picard; ++it) {
    iterations = it;
    for (int k = 0; k < n; ++k) a[k] = consume * p.K12 * c2[k];
    std::vector<double> c1_new = solve_species(grid, ux, uy, p.D, a, q1);
    for (int k = 0; k < n; ++k) a[k] = consume * p.K12 * c1_new[k];
    std::vector<double> c2_new = solve_species(grid, ux, uy, p.D, a, q2);
    for (int k = 0; k < n; ++k) q3[k] = produce * p.K12 * c1_new[k] * c2_new[k];
    std::vector<double> c3_new = solve_species(grid, ux, uy, p.D, k3coef, q3);

    rel_change = 0.0;
    auto update_change = [&](const std::vector<double>& now, const std::vector<double>& before) {
      double dmax = 0.0, vmax = 0.0;
      for (int k = 0; k < n; ++k) {
        dmax = std::max(dmax, std::fabs(now[k] - before[k]));
        vmax = std::max(vmax, std::fabs(now[k]));
      }
      rel_change = std::max(rel_change, dmax / std::max(vmax, 1e-300));
    };
    update_change(c1_new, c1);
    update_change(c2_new, c2);
    update_change(c3_new, c3);
    c1 = std::move(c1_new);
    c2 = std::move(c2_new);
    c3 = std::move(c3_new);

    fields.c1 = RealMatrix(grid.nx, grid.ny);
    fields.c2 = RealMatrix(grid.nx, grid.ny);
    fields.c3 = RealMatrix(grid.nx, grid.ny);
    for (int i = 0; i < grid.nx; ++i)
      for (int j = 0; j < grid.ny; ++j) {
        fields.c1(i, j) = c1[grid.index(i, j)];
        fields.c2(i, j) = c2[grid.index(i, j)];
        fields.c3(i, j) = c3[grid.index(i, j)];
      }
    residual = adr_residual_max(p, grid, velocity, fields, opts);
    if (rel_change <= opts.picard_rel_tol && residual <= opts.residual_tol) {
      converged = true;
      break;
    }
  }

  if (!converged) {
    std::ostringstream os;
    os << "ADR Picard iteration failed to converge after " << iterations
       << " iterations; residual = " << residual << ", relative change = " << rel_change;
    throw numeric_error(os.str());
  }

  if (report) {
    report->picard_iterations = iterations;
    report->final_residual = residual;
    report->final_rel_change = rel_change;
    double cmin = 0.0;
    for (int k = 0; k < n; ++k) cmin = std::min({cmin, c1[k], c2[k], c3[k]});
    if (cmin < -1e-8) {
      std::ostringstream os;
      os << "negative concentration " << cmin << " below -1e-8";
      report->warnings.push_back(os.str());
    }
  }
  return fields;
}

double adr_residual_max(const ADRParams& p, const Grid& grid, const VelocitySampler& velocity,
                        const Fields& fields, const SolveOptions& opts) {
  grid.validate();
  const double consume = opts.paper_signs ? -1.0 : 1.0;
  const double produce = opts.paper_signs ? -1.0 : 1.0;

  const int n = grid.nodes();
  std::vector<double> c1(n), c2(n), c3(n);
  for (int i = 0; i < grid.nx; ++i)
    for (int j = 0; j < grid.ny; ++j) {
      c1[grid.index(i, j)] = fields.c1(i, j);
      c2[grid.index(i, j)] = fields.c2(i, j);
      c3[grid.index(i, j)] = fields.c3(i, j);
    }

  double worst = 0.0;
  for (int i = 0; i < grid.nx; ++i) {
    for (int j = 0; j < grid.ny; ++j) {
      const int k = grid.index(i, j);
      const double x = grid.x(i), y = grid.y(j);
      double r1, r2, r3;
      switch (classify(grid, i, j)) {
        case NodeKind::dirichlet:
          r1 = c1[k];
          r2 = c2[k];
          r3 = c3[k];
          break;
        case NodeKind::bottom:
          r1 = c1[k] - c1[grid.index(i, 1)];
          r2 = c2[k] - c2[grid.index(i, 1)];
          r3 = c3[k] - c3[grid.index(i, 1)];
          break;
        case NodeKind::outflow:
          r1 = c1[k] - c1[grid.index(grid.nx - 2, j)];
          r2 = c2[k] - c2[grid.index(grid.nx - 2, j)];
          r3 = c3[k] - c3[grid.index(grid.nx - 2, j)];
          break;
        case NodeKind::interior: {
          const Velocity v = velocity(x, y);
          const StencilRow base = interior_row(grid, v.ux, v.uy, p.D, 0.0);
          const double reaction = consume * p.K12 * c1[k] * c2[k];
          r1 = apply_stencil(grid, c1, i, j, base) + reaction -
               source_q1(x, y, opts.q1_amplitude);
          r2 = apply_stencil(grid, c2, i, j, base) + reaction -
               source_q2(x, y, opts.q2_amplitude);
          r3 = apply_stencil(grid, c3, i, j, base) + p.K3 * c3[k] -
               produce * p.K12 * c1[k] * c2[k];
          break;
        }
      }
      worst = std::max({worst, std::fabs(r1), std::fabs(r2), std::fabs(r3)});
    }
  }
  return worst;
}

double bilinear(const Grid& grid, const RealMatrix& field, double x, double y) {
  const double tx = std::clamp((x - grid.x0) / grid.dx(), 0.0, double(grid.nx - 1));
  const double ty = std::clamp((y - grid.y0) / grid.dy(), 0.0, double(grid.ny - 1));
  const int i = std::min(int(tx), grid.nx - 2);
  const int j = std::min(int(ty), grid.ny - 2);
  const double fx = tx - i, fy = ty - j;
  return (1.0 - fx) * (1.0 - fy) * field(i, j) + fx * (1.0 - fy) * field(i + 1, j) +
         (1.0 - fx) * fy * field(i, j + 1) + fx * fy * field(i + 1, j + 1);
}

}  // namespace dmdtrain::adr
