#pragma once

#include <cstdint>
#include <vector>

#include "dmdtrain/matrix.hpp"

namespace dmdtrain::nn {

// Layer widths [d_in, h_1, ..., h_L, d_out]. Hidden layers use softsign
// z -> z/(1+|z|); the output layer is affine.
struct MLPSpec {
  std::vector<int> widths;

  int num_layers() const { return int(widths.size()) - 1; }
  // require_hidden rejects pure linear nets; the CLI enforces it, the
  // library accepts zero hidden layers.
  void validate(bool require_hidden = false) const;
};

struct MLPParams {
  struct Layer {
    RealMatrix weights;         // fan_in × fan_out
    std::vector<double> bias;   // fan_out
  };
  std::vector<Layer> layers;

  int num_layers() const { return int(layers.size()); }
};

struct AdamParams {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<MLPParams::Layer> m;  // first moments, same shapes as params
  std::vector<MLPParams::Layer> v;  // second moments
  long t = 0;
  AdamParams hp;
};

// Per-layer post-activations A_0 = X, ..., A_L = output.
struct ForwardCache {
  std::vector<RealMatrix> activations;
};

// Uniform Glorot: weights ~ U(-sqrt(6/(fan_in+fan_out)), +...), biases zero.
MLPParams xavier_init(const MLPSpec& spec, std::uint64_t seed);

AdamState make_adam_state(const MLPSpec& spec, const AdamParams& hp);

// Single-sample forward pass; cache holds what backward needs.
std::vector<double> forward(const MLPParams& params, const std::vector<double>& x,
                            ForwardCache* cache = nullptr);

// Batched forward pass over row-major X (N × d_in).
RealMatrix forward_batch(const MLPParams& params, const RealMatrix& x,
                         ForwardCache* cache = nullptr);

// Mean squared error over batch and output dimensions, plus exact analytic
// gradients in MLPParams shape.
double loss_and_gradients(const MLPParams& params, const RealMatrix& x, const RealMatrix& y,
                          MLPParams* grads);

double mse(const MLPParams& params, const RealMatrix& x, const RealMatrix& y);

void adam_step(MLPParams& params, const MLPParams& grads, AdamState& state);

// Flattened layer parameters: row-major weights, then biases (when included).
std::vector<double> flatten_layer(const MLPParams& params, int layer, bool include_biases = true);
void assign_layer(MLPParams& params, int layer, const std::vector<double>& w,
                  bool include_biases = true);
int flat_dim(const MLPParams& params, int layer, bool include_biases = true);

}  // namespace dmdtrain::nn
