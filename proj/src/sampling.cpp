#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "dmdtrain/adr.hpp"

namespace dmdtrain::adr {

RealMatrix lhs_sample(int n, const std::vector<std::pair<double, double>>& ranges,
                      std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lhs_sample: n must be >= 1");
  if (ranges.empty()) throw std::invalid_argument("lhs_sample: no ranges given");
  for (const auto& [lo, hi] : ranges)
    if (!(hi >= lo)) throw std::invalid_argument("lhs_sample: inverted range");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RealMatrix samples(n, int(ranges.size()));

  std::vector<int> strata(n);
  for (int d = 0; d < int(ranges.size()); ++d) {
    std::iota(strata.begin(), strata.end(), 0);
    std::shuffle(strata.begin(), strata.end(), rng);
    const auto [lo, hi] = ranges[d];
    for (int i = 0; i < n; ++i) {
      // Clamp the in-stratum offset a hair inside (0,1) so the stratum index
      // survives the affine map and its float roundoff exactly.
      const double u = std::clamp(unit(rng), 1e-12, 1.0 - 1e-12);
      samples(i, d) = lo + (strata[i] + u) / double(n) * (hi - lo);
    }
  }
  return samples;
}

namespace {

// First `count` cell centers of a lattice spanning [xa,xb]×[ya,yb], shaped
// to the box aspect ratio.
void lattice_points(int count, double xa, double xb, double ya, double yb,
                    std::vector<std::pair<double, double>>& out) {
  if (count <= 0) return;
  const double w = std::max(xb - xa, 1e-12);
  const double h = std::max(yb - ya, 1e-12);
  int cols = std::max(1, int(std::ceil(std::sqrt(double(count) * w / h))));
  int rows = std::max(1, (count + cols - 1) / cols);
  int emitted = 0;
  for (int r = 0; r < rows && emitted < count; ++r)
    for (int c = 0; c < cols && emitted < count; ++c) {
      out.emplace_back(xa + (c + 0.5) * w / cols, ya + (r + 0.5) * h / rows);
      ++emitted;
    }
}

}  // namespace

std::vector<std::pair<double, double>> default_probes(int count, const Grid& grid) {
  if (count < 1) throw std::invalid_argument("default_probes: count must be >= 1");
  const double x1 = grid.x0 + grid.lx;
  const double y1 = grid.y0 + grid.ly;

  const int n_source = int(std::lround(0.45 * count));
  const int n_bottom = int(std::lround(0.25 * count));
  const int n_rest = count - n_source - n_bottom;

  std::vector<std::pair<double, double>> probes;
  probes.reserve(count);
  lattice_points(n_source, grid.x0, std::min(grid.x0 + 1.6, x1), grid.y0,
                 std::min(grid.y0 + 0.7, y1), probes);
  lattice_points(n_bottom, grid.x0, x1, grid.y0, std::min(grid.y0 + 0.3, y1), probes);
  lattice_points(n_rest, grid.x0, x1, grid.y0, y1, probes);
  return probes;
}

}  // namespace dmdtrain::adr
