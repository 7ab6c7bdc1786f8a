#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dmdtrain/dmd.hpp"
#include "dmdtrain/nn.hpp"

namespace dmdtrain::trainer {

struct TrainConfig {
  int m = 14;              // snapshots per DMD fit
  int s = 55;              // extrapolation steps past the anchor
  double dmd_tol = 1e-10;  // singular-value filter
  int total_epochs = 1;
  bool dmd_enabled = true;
  bool reset_adam_after_dmd = false;
  bool snapshot_biases = true;  // include biases in the flattened snapshots
  std::uint64_t seed = 0;
  nn::AdamParams adam;
  dmd::Options dmd_options;

  void validate() const;  // throws std::invalid_argument naming the field
};

struct DMDEvent {
  int epoch = 0;  // 1-based epoch at which the event fired
  std::vector<int> layers_updated;
  std::vector<int> layers_skipped;
  double train_mse_before = 0.0;
  double train_mse_after = 0.0;
  double test_mse_before = 0.0;
  double test_mse_after = 0.0;
  double relative_error_train = 0.0;  // after / before
  double relative_error_test = 0.0;
  std::uint64_t dmd_flops = 0;  // metered kernel ops summed over layers
  std::vector<std::string> warnings;
};

struct TrainLog {
  std::vector<double> train_mse;     // one entry per epoch, end-of-epoch state
  std::vector<double> test_mse;
  std::vector<std::uint8_t> event_flag;
  std::vector<DMDEvent> events;
  double backprop_seconds = 0.0;
  double dmd_seconds = 0.0;
  double eval_seconds = 0.0;
};

struct Model {
  nn::MLPSpec spec;
  nn::MLPParams params;
  nn::AdamState adam;
};

struct DataSplit {
  RealMatrix train_x, train_y;
  RealMatrix test_x, test_y;
};

// Receives each layer's snapshot matrix right before it is consumed by a fit.
class SnapshotSink {
 public:
  virtual ~SnapshotSink() = default;
  virtual void on_snapshot(int epoch, int layer, const RealMatrix& w) = 0;
};

// One full-batch Adam step per epoch; every m-th epoch fits a DMD model per
// layer and jumps the weights s steps forward. A layer whose fit or
// extrapolation fails keeps its backprop weights (warning recorded); the run
// itself never aborts on DMD divergence.
TrainLog train(Model& model, const DataSplit& data, const TrainConfig& cfg,
               SnapshotSink* sink = nullptr);

enum class Split { train, test };

// Unweighted mean of per-event relative errors. Throws when the log holds no
// events.
double mean_relative_error(const TrainLog& log, Split split = Split::train);

struct SweepCell {
  double mean_rel_train = 0.0;
  double mean_rel_test = 0.0;
  double final_train_mse = 0.0;
  double final_test_mse = 0.0;
  int events = 0;
  std::string status;  // "ok", "no-events", or an error description
};

struct SweepGrid {
  std::vector<int> m_values;
  std::vector<int> s_values;
  std::vector<std::vector<SweepCell>> cells;  // [m index][s index]
};

// One independent run per (m, s) cell, each from identical initial weights
// (xavier_init(spec, base.seed)). Failed cells are marked, not dropped.
SweepGrid sweep(const nn::MLPSpec& spec, const DataSplit& data, const std::vector<int>& m_values,
                const std::vector<int>& s_values, const TrainConfig& base);

}  // namespace dmdtrain::trainer
