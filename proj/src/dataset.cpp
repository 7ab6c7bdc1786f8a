#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dmdtrain/adr.hpp"
#include "dmdtrain/errors.hpp"

namespace dmdtrain::adr {

namespace {

ADRParams params_from_row(const RealMatrix& samples, int row) {
  ADRParams p;
  p.K12 = samples(row, 0);
  p.K3 = samples(row, 1);
  p.D = samples(row, 2);
  p.U0 = samples(row, 3);
  p.uh = samples(row, 4);
  p.uv = samples(row, 5);
  return p;
}

// Blasius + ADR solve for one parameter set, probing c3.
std::vector<double> solve_sample(const ADRParams& p, const GeneratorConfig& cfg,
                                 const std::vector<std::pair<double, double>>& probes) {
  const BlasiusSolution bl = solve_blasius(p, cfg.eta_max, cfg.n_eta);
  const BoundaryLayerField vel{bl, p, cfg.paper_uy};
  const Fields fields = solve_adr(p, cfg.grid, vel, cfg.solve);
  std::vector<double> row(probes.size());
  for (std::size_t k = 0; k < probes.size(); ++k)
    row[k] = bilinear(cfg.grid, fields.c3, probes[k].first, probes[k].second);
  return row;
}

}  // namespace

double Dataset::raw_input(int row, int col) const {
  return input_lo[col] + (inputs(row, col) + 1.0) * 0.5 * (input_hi[col] - input_lo[col]);
}

trainer::DataSplit Dataset::to_split() const {
  trainer::DataSplit split;
  auto gather = [&](const std::vector<int>& idx, RealMatrix& xs, RealMatrix& ys) {
    xs = RealMatrix(int(idx.size()), inputs.cols);
    ys = RealMatrix(int(idx.size()), outputs.cols);
    for (int r = 0; r < int(idx.size()); ++r) {
      for (int c = 0; c < inputs.cols; ++c) xs(r, c) = inputs(idx[r], c);
      for (int c = 0; c < outputs.cols; ++c) ys(r, c) = outputs(idx[r], c);
    }
  };
  gather(train_indices, split.train_x, split.train_y);
  gather(test_indices, split.test_x, split.test_y);
  return split;
}

Dataset build_dataset(const GeneratorConfig& cfg) {
  return build_dataset(cfg, default_probes(cfg.probe_count, cfg.grid));
}

Dataset build_dataset(const GeneratorConfig& cfg,
                      const std::vector<std::pair<double, double>>& probes) {
  if (cfg.n < 10) throw std::invalid_argument("build_dataset: n must be >= 10");
  if (probes.empty()) throw std::invalid_argument("build_dataset: no probes");
  cfg.grid.validate();
  const double x1 = cfg.grid.x0 + cfg.grid.lx;
  const double y1 = cfg.grid.y0 + cfg.grid.ly;
  for (const auto& [px, py] : probes)
    if (px < cfg.grid.x0 || px > x1 || py < cfg.grid.y0 || py > y1)
      throw std::invalid_argument("build_dataset: probe outside the domain");

  const auto ranges = cfg.ranges.as_vector();
  RealMatrix raw_params = lhs_sample(cfg.n, ranges, cfg.seed);
  RealMatrix raw_outputs(cfg.n, int(probes.size()));

  std::vector<int> failed(cfg.n, 0);
  std::vector<std::string> first_error(cfg.n);
  // Each sample is an independent solve; slots are written by index so the
  // ordering never depends on scheduling.
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < cfg.n; ++i) {
    try {
      const std::vector<double> row = solve_sample(params_from_row(raw_params, i), cfg, probes);
      for (std::size_t k = 0; k < row.size(); ++k) raw_outputs(i, int(k)) = row[k];
    } catch (const std::exception& e) {
      failed[i] = 1;
      first_error[i] = e.what();
    }
  }

  // One deterministic redraw per failed sample.
  for (int i = 0; i < cfg.n; ++i) {
    if (!failed[i]) continue;
    std::mt19937_64 rng(cfg.seed ^ (0x9e3779b97f4a7c15ull * std::uint64_t(i + 1)));
    for (int d = 0; d < 6; ++d) {
      std::uniform_real_distribution<double> dist(ranges[d].first, ranges[d].second);
      raw_params(i, d) = dist(rng);
    }
    try {
      const std::vector<double> row = solve_sample(params_from_row(raw_params, i), cfg, probes);
      for (std::size_t k = 0; k < row.size(); ++k) raw_outputs(i, int(k)) = row[k];
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "build_dataset: sample " << i << " failed twice. first: " << first_error[i]
         << "; retry with (K12=" << raw_params(i, 0) << ", K3=" << raw_params(i, 1)
         << ", D=" << raw_params(i, 2) << ", U0=" << raw_params(i, 3)
         << ", uh=" << raw_params(i, 4) << ", uv=" << raw_params(i, 5) << "): " << e.what();
      throw numeric_error(os.str());
    }
  }

  Dataset ds;
  ds.config = cfg;
  ds.probes = probes;
  ds.input_lo.resize(6);
  ds.input_hi.resize(6);
  ds.inputs = RealMatrix(cfg.n, 6);
  for (int d = 0; d < 6; ++d) {
    double lo = raw_params(0, d), hi = raw_params(0, d);
    for (int i = 1; i < cfg.n; ++i) {
      lo = std::min(lo, raw_params(i, d));
      hi = std::max(hi, raw_params(i, d));
    }
    ds.input_lo[d] = lo;
    ds.input_hi[d] = hi;
    const double span = hi - lo;
    for (int i = 0; i < cfg.n; ++i)
      ds.inputs(i, d) = span > 0.0 ? (raw_params(i, d) - lo) / span * 2.0 - 1.0 : 0.0;
  }

  double out_max = 0.0;
  for (double v : raw_outputs.data) {
    if (!std::isfinite(v)) throw numeric_error("build_dataset: non-finite probe value");
    out_max = std::max(out_max, std::fabs(v));
  }
  if (out_max == 0.0) throw numeric_error("build_dataset: all probe outputs are zero");
  ds.output_max = out_max;
  ds.outputs = RealMatrix(cfg.n, raw_outputs.cols);
  for (std::size_t k = 0; k < raw_outputs.data.size(); ++k)
    ds.outputs.data[k] = raw_outputs.data[k] / out_max;

  std::vector<int> order(cfg.n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 split_rng(cfg.seed + 1);
  std::shuffle(order.begin(), order.end(), split_rng);
  const int train_count = (4 * cfg.n) / 5;  // floor(0.8 N) train, ceil(0.2 N) test
  ds.train_indices.assign(order.begin(), order.begin() + train_count);
  ds.test_indices.assign(order.begin() + train_count, order.end());
  std::sort(ds.train_indices.begin(), ds.train_indices.end());
  std::sort(ds.test_indices.begin(), ds.test_indices.end());
  return ds;
}

}  // namespace dmdtrain::adr
