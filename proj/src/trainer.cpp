#include "dmdtrain/trainer.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "dmdtrain/errors.hpp"
#include "dmdtrain/kernels.hpp"

namespace dmdtrain::trainer {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct LayerProposal {
  bool ok = false;
  std::vector<double> weights;
  std::uint64_t flops = 0;
  std::string error;
};

}  // namespace

void TrainConfig::validate() const {
  if (total_epochs < 1) throw std::invalid_argument("total_epochs: must be >= 1");
  if (dmd_enabled) {
    if (m < 2) throw std::invalid_argument("m: must be >= 2 when DMD is enabled");
    if (s < 0) throw std::invalid_argument("s: must be >= 0");
    if (!(dmd_tol > 0.0 && dmd_tol < 1.0))
      throw std::invalid_argument("dmd_tol: must lie in (0,1)");
  }
  if (!(adam.lr > 0.0)) throw std::invalid_argument("lr: must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0))
    throw std::invalid_argument("beta1: must lie in [0,1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw std::invalid_argument("beta2: must lie in [0,1)");
  if (!(adam.eps > 0.0)) throw std::invalid_argument("epsilon: must be > 0");
}

TrainLog train(Model& model, const DataSplit& data, const TrainConfig& cfg, SnapshotSink* sink) {
  cfg.validate();
  require(data.train_x.rows >= 1 && data.test_x.rows >= 1, "train: empty data split");
  require(data.train_x.cols == model.spec.widths.front(), "train: input width mismatch");
  require(data.train_y.cols == model.spec.widths.back(), "train: output width mismatch");

  const int num_layers = model.params.num_layers();
  std::vector<dmd::SnapshotBuffer> buffers;
  if (cfg.dmd_enabled) {
    buffers.reserve(num_layers);
    for (int l = 0; l < num_layers; ++l)
      buffers.emplace_back(l, nn::flat_dim(model.params, l, cfg.snapshot_biases), cfg.m);
  }

  TrainLog log;
  log.train_mse.resize(cfg.total_epochs);
  log.test_mse.resize(cfg.total_epochs);
  log.event_flag.assign(cfg.total_epochs, 0);

  nn::MLPParams grads;
  for (int epoch = 1; epoch <= cfg.total_epochs; ++epoch) {
    auto t0 = std::chrono::steady_clock::now();
    nn::loss_and_gradients(model.params, data.train_x, data.train_y, &grads);
    nn::adam_step(model.params, grads, model.adam);
    log.backprop_seconds += seconds_since(t0);

    bool event_fired = false;
    double after_train = 0.0, after_test = 0.0;
    if (cfg.dmd_enabled) {
      for (int l = 0; l < num_layers; ++l)
        buffers[l].push(nn::flatten_layer(model.params, l, cfg.snapshot_biases));

      if (buffers[0].full()) {
        event_fired = true;
        DMDEvent ev;
        ev.epoch = epoch;

        auto te = std::chrono::steady_clock::now();
        ev.train_mse_before = nn::mse(model.params, data.train_x, data.train_y);
        ev.test_mse_before = nn::mse(model.params, data.test_x, data.test_y);
        log.eval_seconds += seconds_since(te);

        auto td = std::chrono::steady_clock::now();
        std::vector<LayerProposal> proposals(num_layers);
        // Per-layer fits are independent; proposals are applied in layer
        // order afterwards so the result does not depend on scheduling.
#pragma omp parallel for schedule(dynamic)
        for (int l = 0; l < num_layers; ++l) {
          LayerProposal& prop = proposals[l];
          try {
            const dmd::SnapshotBuffer& buf = buffers[l];
            const RealMatrix w = buf.to_matrix();
            if (sink) sink->on_snapshot(epoch, l, w);
            const dmd::DMDModel fit = dmd::fit_dmd(w, cfg.dmd_tol, cfg.dmd_options);
            prop.weights = dmd::extrapolate(fit, buf.columns.back(), cfg.s);
            prop.flops = fit.fit_flops;
            prop.ok = true;
          } catch (const std::exception& e) {
            std::ostringstream os;
            os << "layer " << l << ": " << e.what();
            prop.error = os.str();
          }
        }
        for (int l = 0; l < num_layers; ++l) {
          if (proposals[l].ok) {
            nn::assign_layer(model.params, l, proposals[l].weights, cfg.snapshot_biases);
            ev.layers_updated.push_back(l);
            ev.dmd_flops += proposals[l].flops;
          } else {
            ev.layers_skipped.push_back(l);
            ev.warnings.push_back(proposals[l].error);
          }
        }
        for (auto& buf : buffers) buf.clear();
        if (cfg.reset_adam_after_dmd) model.adam = nn::make_adam_state(model.spec, cfg.adam);
        log.dmd_seconds += seconds_since(td);

        te = std::chrono::steady_clock::now();
        ev.train_mse_after = nn::mse(model.params, data.train_x, data.train_y);
        ev.test_mse_after = nn::mse(model.params, data.test_x, data.test_y);
        log.eval_seconds += seconds_since(te);
        ev.relative_error_train =
            ev.train_mse_before > 0.0 ? ev.train_mse_after / ev.train_mse_before : 1.0;
        ev.relative_error_test =
            ev.test_mse_before > 0.0 ? ev.test_mse_after / ev.test_mse_before : 1.0;
        after_train = ev.train_mse_after;
        after_test = ev.test_mse_after;
        log.events.push_back(std::move(ev));
        log.event_flag[epoch - 1] = 1;
      }
    }

    if (event_fired) {
      log.train_mse[epoch - 1] = after_train;
      log.test_mse[epoch - 1] = after_test;
    } else {
      auto te = std::chrono::steady_clock::now();
      log.train_mse[epoch - 1] = nn::mse(model.params, data.train_x, data.train_y);
      log.test_mse[epoch - 1] = nn::mse(model.params, data.test_x, data.test_y);
      log.eval_seconds += seconds_since(te);
    }
  }
  return log;
}

double mean_relative_error(const TrainLog& log, Split split) {
  if (log.events.empty()) throw std::invalid_argument("no DMD events recorded");
  double s = 0.0;
  for (const DMDEvent& ev : log.events)
    s += split == Split::train ? ev.relative_error_train : ev.relative_error_test;
  return s / double(log.events.size());
}

SweepGrid sweep(const nn::MLPSpec& spec, const DataSplit& data, const std::vector<int>& m_values,
                const std::vector<int>& s_values, const TrainConfig& base) {
  require(!m_values.empty() && !s_values.empty(), "sweep: empty value lists");

  SweepGrid grid;
  grid.m_values = m_values;
  grid.s_values = s_values;
  grid.cells.assign(m_values.size(), std::vector<SweepCell>(s_values.size()));

  for (std::size_t im = 0; im < m_values.size(); ++im) {
    for (std::size_t is = 0; is < s_values.size(); ++is) {
      SweepCell& cell = grid.cells[im][is];
      TrainConfig cfg = base;
      cfg.m = m_values[im];
      cfg.s = s_values[is];
      cfg.dmd_enabled = true;
      try {
        cfg.validate();
        Model model;
        model.spec = spec;
        model.params = nn::xavier_init(spec, base.seed);
        model.adam = nn::make_adam_state(spec, base.adam);
        const TrainLog log = train(model, data, cfg);
        cell.final_train_mse = log.train_mse.back();
        cell.final_test_mse = log.test_mse.back();
        cell.events = int(log.events.size());
        if (log.events.empty()) {
          cell.mean_rel_train = std::numeric_limits<double>::quiet_NaN();
          cell.mean_rel_test = std::numeric_limits<double>::quiet_NaN();
          cell.status = "no-events";
        } else {
          cell.mean_rel_train = mean_relative_error(log, Split::train);
          cell.mean_rel_test = mean_relative_error(log, Split::test);
          cell.status = "ok";
        }
        if (!std::isfinite(cell.final_train_mse) || !std::isfinite(cell.final_test_mse))
          cell.status = "diverged";
      } catch (const std::exception& e) {
        cell.mean_rel_train = std::numeric_limits<double>::quiet_NaN();
        cell.mean_rel_test = std::numeric_limits<double>::quiet_NaN();
        cell.final_train_mse = std::numeric_limits<double>::quiet_NaN();
        cell.final_test_mse = std::numeric_limits<double>::quiet_NaN();
        cell.status = e.what();
      }
    }
  }
  return grid;
}

}  // namespace dmdtrain::trainer
