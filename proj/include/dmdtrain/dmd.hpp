#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dmdtrain/matrix.hpp"

namespace dmdtrain::dmd {

struct Options {
  // Build modes from the forwarded data, Phi = W+ V Σ^{-1} Y, instead of U Y.
  bool exact_modes = false;
  // Amplitudes from least squares min ||Phi b - w||_2 instead of Phi^H w.
  // The least-squares form reproduces linear trajectories exactly even when
  // the reduced operator is non-normal; the default follows the transpose
  // rule, which is exact for orthonormal modes.
  bool ls_amplitudes = false;
  // Rescale eigenvalues with |lambda| > 1 + 1e-6 to unit modulus.
  bool clamp_unstable = false;
};

// One layer's fitted weight dynamics: w(s) ≈ Re( modes · diag(eigenvalues)^s · amplitudes ).
struct DMDModel {
  ComplexMatrix modes;                // n×r (Phi)
  std::vector<complexd> eigenvalues;  // r, descending modulus, conjugate-closed
  std::vector<complexd> amplitudes;   // r (b)
  int rank = 0;
  int snapshot_count = 0;   // m used for the fit
  std::uint64_t fit_flops = 0;  // metered kernel ops for this fit
};

// Fixed-capacity store of flattened per-step parameter vectors, oldest first.
struct SnapshotBuffer {
  int layer_id = 0;
  int dim = 0;       // n
  int capacity = 0;  // m
  std::vector<std::vector<double>> columns;

  SnapshotBuffer() = default;
  SnapshotBuffer(int layer, int n, int m) : layer_id(layer), dim(n), capacity(m) {}

  int size() const { return int(columns.size()); }
  bool full() const { return size() >= capacity; }
  void push(const std::vector<double>& w);
  RealMatrix to_matrix() const;  // dim × size, column j = j-th stored vector
  void clear() { columns.clear(); }
};

// Lagged and forwarded snapshot matrices: first and last m-1 columns of W.
std::pair<RealMatrix, RealMatrix> shift_split(const RealMatrix& w);

// Fit the reduced step operator to the snapshots (columns ordered in time)
// and return the modal model. tol filters singular values of the lagged
// matrix; requires m >= 2 and n >= m.
DMDModel fit_dmd(const RealMatrix& w, double tol, const Options& opts = {});

// Re(Phi · Lambda^steps · b). anchor is the snapshot the amplitudes were
// computed at (the last column of the fitted matrix); it scales the
// realness guard. Errors out rather than returning non-finite values.
std::vector<double> extrapolate(const DMDModel& model, const std::vector<double>& anchor,
                                long steps);

}  // namespace dmdtrain::dmd
