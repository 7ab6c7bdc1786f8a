#pragma once

#include <string>

#include "dmdtrain/adr.hpp"
#include "dmdtrain/trainer.hpp"

namespace dmdtrain::io {

// Per-epoch training log:
// epoch,train_mse,test_mse,event_flag,relative_error_train,relative_error_test
// Non-event rows leave the relative-error columns empty. Doubles print with
// 17 significant digits so reruns are byte-for-byte comparable.
void write_train_log_csv(const std::string& path, const trainer::TrainLog& log);

// Dense m×s grids (train and test mean relative error) plus a long-format
// table with one row per cell.
void write_sweep_csvs(const std::string& prefix, const trainer::SweepGrid& grid);

void save_dataset(const std::string& path, const adr::Dataset& ds);
adr::Dataset load_dataset(const std::string& path);

// inputs.csv / outputs.csv companions to the dataset container.
void export_dataset_csv(const std::string& prefix, const adr::Dataset& ds);

void save_checkpoint(const std::string& path, const trainer::Model& model, std::uint64_t seed);
trainer::Model load_checkpoint(const std::string& path, std::uint64_t* seed = nullptr);

// Resolved-configuration manifest written next to every output.
void write_manifest(const std::string& path, const std::string& json_text);

void write_blasius_csv(const std::string& path, const adr::BlasiusSolution& sol);

// Writes one CSV per layer per event: header row "n,m,layer_id", a values
// row, then the snapshot matrix in column-major order (one snapshot per line).
class DirectorySnapshotSink : public trainer::SnapshotSink {
 public:
  explicit DirectorySnapshotSink(std::string dir);
  void on_snapshot(int epoch, int layer, const RealMatrix& w) override;

 private:
  std::string dir_;
};

std::string format_double(double v);  // shortest round-trip-exact decimal

}  // namespace dmdtrain::io
