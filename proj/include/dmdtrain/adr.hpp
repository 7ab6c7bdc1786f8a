#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "dmdtrain/matrix.hpp"
#include "dmdtrain/trainer.hpp"

namespace dmdtrain::adr {

// Physical parameters of the dispersion problem. nu is the kinematic
// viscosity of air in the non-dimensional formulation.
struct ADRParams {
  double K12 = 10.0;  // production rate of the pollutant
  double K3 = 1.0;    // pollutant decay rate
  double D = 0.1;     // shared diffusion coefficient
  double U0 = 1.0;    // free-stream wind speed
  double uh = 0.0;    // horizontal slip velocity at the ground
  double uv = 0.0;    // vertical (buoyant) velocity scale at the ground
  double nu = 1e-5;
};

// Boundary-layer similarity profile sampled on a uniform grid. The solved
// form is f''' + f f'' = 0, the scaling that matches eta = sqrt(U0/(2 nu x)) y
// (flat plate: f''(0) = 0.4696).
struct BlasiusSolution {
  double eta_max = 0.0;
  std::vector<double> eta, f, fp, fpp;  // n_eta + 1 points
  double fpp0 = 0.0;                    // shot initial curvature f''(0)
};

// Shooting solve of the similarity profile: f'(0) = uh/U0,
// f(0) = -2 uv / sqrt(nu U0), f'(eta_max) = 1, RK4 on a uniform grid with
// bracketing + safeguarded secant on f''(0). n_eta counts integration
// intervals (the grid has n_eta + 1 points).
BlasiusSolution solve_blasius(const ADRParams& p, double eta_max = 10.0, int n_eta = 2000);

struct Velocity {
  double ux = 0.0;
  double uy = 0.0;
};

// ux = U0 f'(eta), uy = 0.5 sqrt(nu U0 / x) (eta f' - f) with
// eta = sqrt(U0/(2 nu x)) y. Beyond eta_max the profile continues with
// f' = 1 (so eta f' - f stays constant, the entrainment velocity).
// paper_uy switches to the printed non-square-root prefactor.
Velocity velocity_at(double x, double y, const BlasiusSolution& blasius, const ADRParams& p,
                     bool paper_uy = false);

struct BoundaryLayerField {
  BlasiusSolution blasius;
  ADRParams params;
  bool paper_uy = false;
  Velocity operator()(double x, double y) const {
    return velocity_at(x, y, blasius, params, paper_uy);
  }
};

using VelocitySampler = std::function<Velocity(double, double)>;

// Node-centered uniform grid over [x0, x0+lx] × [y0, y0+ly].
struct Grid {
  int nx = 64;
  int ny = 32;
  double x0 = 0.05;
  double y0 = 0.0;
  double lx = 4.0;
  double ly = 2.0;

  double dx() const { return lx / (nx - 1); }
  double dy() const { return ly / (ny - 1); }
  double x(int i) const { return x0 + i * dx(); }
  double y(int j) const { return y0 + j * dy(); }
  int index(int i, int j) const { return i * ny + j; }
  int nodes() const { return nx * ny; }
  void validate() const;
};

struct Fields {
  RealMatrix c1, c2, c3;  // nx × ny, entry (i, j) at grid node (x_i, y_j)
};

struct SolveOptions {
  double picard_rel_tol = 1e-8;
  double residual_tol = 1e-9;
  int max_picard = 200;
  bool paper_signs = false;  // reproduce the printed reaction signs
  double q1_amplitude = 0.1;
  double q2_amplitude = 0.1;
};

struct SolveReport {
  int picard_iterations = 0;
  double final_residual = 0.0;
  double final_rel_change = 0.0;
  std::vector<std::string> warnings;
};

// Steady coupled solve with first-order upwind advection, central diffusion,
// Picard linearization of the K12 c1 c2 term, and a banded direct solver for
// the inner systems. Zero Dirichlet at inflow (left) and top, zero normal
// gradient at the terrain (bottom) and outflow (right).
Fields solve_adr(const ADRParams& p, const Grid& grid, const VelocitySampler& velocity,
                 const SolveOptions& opts = {}, SolveReport* report = nullptr);

// Max-norm residual of the discrete nonlinear system at the given fields,
// assembled independently of the solver loop.
double adr_residual_max(const ADRParams& p, const Grid& grid, const VelocitySampler& velocity,
                        const Fields& fields, const SolveOptions& opts = {});

// Chimney source disks.
double source_q1(double x, double y, double amplitude = 0.1);
double source_q2(double x, double y, double amplitude = 0.1);

// Bilinear interpolation of a node field at (x, y); clamps to the domain hull.
double bilinear(const Grid& grid, const RealMatrix& field, double x, double y);

// General banded linear solver (partial pivoting, LAPACK-style band storage).
class BandMatrix {
 public:
  BandMatrix(int n, int kl, int ku);
  void add(int i, int j, double v);
  double get(int i, int j) const;
  void factor();  // throws numeric_error when singular
  std::vector<double> solve(std::vector<double> rhs) const;
  int size() const { return n_; }

 private:
  double& at(int i, int j);
  double at(int i, int j) const;
  int n_, kl_, ku_;
  std::vector<double> ab_;  // (2*kl+ku+1) stored diagonals
  std::vector<int> piv_;
  bool factored_ = false;
};

// Latin Hypercube sample: n rows, one column per range; each dimension has
// exactly one draw per stratum, strata permuted independently per dimension.
RealMatrix lhs_sample(int n, const std::vector<std::pair<double, double>>& ranges,
                      std::uint64_t seed);

// Per-dimension sampling intervals; desk-scale defaults keep the similarity
// boundary-layer problem solvable across the whole box.
struct SampleRanges {
  std::pair<double, double> K12{1.0, 20.0};
  std::pair<double, double> K3{0.0, 10.0};
  std::pair<double, double> D{0.01, 0.5};
  std::pair<double, double> U0{0.3, 2.0};
  std::pair<double, double> uh{-0.08, 0.08};
  std::pair<double, double> uv{-0.002, 0.002};

  std::vector<std::pair<double, double>> as_vector() const {
    return {K12, K3, D, U0, uh, uv};
  }
};

// Deterministic stratified probe layout: 45% in a near-source box, 25% in a
// bottom strip, the rest on a domain-wide lattice.
std::vector<std::pair<double, double>> default_probes(int count, const Grid& grid);

struct GeneratorConfig {
  int n = 200;
  Grid grid;
  int probe_count = 120;
  std::uint64_t seed = 0;
  SampleRanges ranges;
  double eta_max = 10.0;
  int n_eta = 2000;
  SolveOptions solve;
  bool paper_uy = false;
};

struct Dataset {
  RealMatrix inputs;   // N×6, min-max normalized to [-1, 1] per column
  RealMatrix outputs;  // N×P, scaled to [0, 1] by the global raw max
  std::vector<std::pair<double, double>> probes;
  std::vector<double> input_lo, input_hi;  // observed per-column raw extremes
  double output_max = 0.0;                 // raw output global max
  std::vector<int> train_indices, test_indices;
  GeneratorConfig config;

  double raw_input(int row, int col) const;
  double raw_output(int row, int col) const { return outputs(row, col) * output_max; }
  trainer::DataSplit to_split() const;
};

// LHS parameters -> Blasius + ADR solve per sample -> probe extraction ->
// scaling -> seeded 80/20 split. A failed sample is redrawn once; a second
// failure aborts with diagnostics.
Dataset build_dataset(const GeneratorConfig& cfg);
Dataset build_dataset(const GeneratorConfig& cfg,
                      const std::vector<std::pair<double, double>>& probes);

}  // namespace dmdtrain::adr
