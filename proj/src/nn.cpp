#include "dmdtrain/nn.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

#include "dmdtrain/errors.hpp"
#include "dmdtrain/kernels.hpp"

namespace dmdtrain::nn {

namespace {

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline double softsign(double z) { return z / (1.0 + std::fabs(z)); }

// Derivative of softsign expressed through the post-activation value:
// a = z/(1+|z|)  =>  d a/d z = (1-|a|)^2.
inline double softsign_deriv_from_act(double a) {
  const double t = 1.0 - std::fabs(a);
  return t * t;
}

void check_finite_or_throw(const RealMatrix& m, int layer) {
  if (!all_finite(m)) {
    std::ostringstream os;
    os << "non-finite activation in layer " << layer;
    throw numeric_error(os.str());
  }
}

}  // namespace

void MLPSpec::validate(bool require_hidden) const {
  require(widths.size() >= 2, "MLPSpec: need at least input and output widths");
  for (int w : widths) require(w >= 1, "MLPSpec: all widths must be >= 1");
  if (require_hidden)
    require(widths.size() >= 3, "MLPSpec: at least one hidden layer required");
}

MLPParams xavier_init(const MLPSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  MLPParams params;
  params.layers.resize(spec.num_layers());
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int fan_in = spec.widths[l];
    const int fan_out = spec.widths[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-bound, bound);
    auto& layer = params.layers[l];
    layer.weights = RealMatrix(fan_in, fan_out);
    for (double& w : layer.weights.data) w = dist(rng);
    layer.bias.assign(fan_out, 0.0);
  }
  return params;
}

AdamState make_adam_state(const MLPSpec& spec, const AdamParams& hp) {
  spec.validate();
  AdamState state;
  state.hp = hp;
  state.t = 0;
  state.m.resize(spec.num_layers());
  state.v.resize(spec.num_layers());
  for (int l = 0; l < spec.num_layers(); ++l) {
    const int fan_in = spec.widths[l];
    const int fan_out = spec.widths[l + 1];
    state.m[l].weights = RealMatrix(fan_in, fan_out);
    state.m[l].bias.assign(fan_out, 0.0);
    state.v[l].weights = RealMatrix(fan_in, fan_out);
    state.v[l].bias.assign(fan_out, 0.0);
  }
  return state;
}

RealMatrix forward_batch(const MLPParams& params, const RealMatrix& x, ForwardCache* cache) {
  require(params.num_layers() >= 1, "forward: empty network");
  require(x.cols == params.layers.front().weights.rows, "forward: input width mismatch");
  if (!all_finite(x)) throw numeric_error("forward: non-finite input");

  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  RealMatrix a = x;
  const int L = params.num_layers();
  for (int l = 0; l < L; ++l) {
    const auto& layer = params.layers[l];
    RealMatrix z = kernels::matmul(a, layer.weights);
    const int fan_out = layer.weights.cols;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < z.rows; ++i) {
      double* row = z.row_ptr(i);
      for (int j = 0; j < fan_out; ++j) row[j] += layer.bias[j];
      if (l + 1 < L)
        for (int j = 0; j < fan_out; ++j) row[j] = softsign(row[j]);
    }
    check_finite_or_throw(z, l);
    a = std::move(z);
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

std::vector<double> forward(const MLPParams& params, const std::vector<double>& x,
                            ForwardCache* cache) {
  RealMatrix xm(1, int(x.size()));
  for (std::size_t j = 0; j < x.size(); ++j) xm(0, j) = x[j];
  RealMatrix ym = forward_batch(params, xm, cache);
  return std::vector<double>(ym.data.begin(), ym.data.end());
}

double mse(const MLPParams& params, const RealMatrix& x, const RealMatrix& y) {
  require(x.rows == y.rows && x.rows >= 1, "mse: batch shapes disagree");
  RealMatrix p = forward_batch(params, x);
  require(p.cols == y.cols, "mse: target width mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < p.data.size(); ++i) {
    const double e = p.data[i] - y.data[i];
    s += e * e;
  }
  return s / double(p.data.size());
}

double loss_and_gradients(const MLPParams& params, const RealMatrix& x, const RealMatrix& y,
                          MLPParams* grads) {
  require(grads != nullptr, "loss_and_gradients: grads output required");
  require(x.rows == y.rows && x.rows >= 1, "loss_and_gradients: batch shapes disagree");
  require(y.cols == params.layers.back().weights.cols,
          "loss_and_gradients: target width mismatch");

  ForwardCache cache;
  RealMatrix pred = forward_batch(params, x, &cache);

  const int L = params.num_layers();
  const std::size_t count = pred.data.size();
  double loss = 0.0;
  RealMatrix delta(pred.rows, pred.cols);
  for (std::size_t i = 0; i < count; ++i) {
    const double e = pred.data[i] - y.data[i];
    loss += e * e;
    delta.data[i] = 2.0 * e / double(count);
  }
  loss /= double(count);

  grads->layers.resize(L);
  for (int l = L - 1; l >= 0; --l) {
    const RealMatrix& a_prev = cache.activations[l];
    auto& g = grads->layers[l];
    g.weights = kernels::matmul_transA(a_prev, delta);
    g.bias.assign(delta.cols, 0.0);
    for (int j = 0; j < delta.cols; ++j) {
      double acc = 0.0;
      for (int i = 0; i < delta.rows; ++i) acc += delta(i, j);
      g.bias[j] = acc;
    }
    if (l > 0) {
      RealMatrix next = kernels::matmul_transB(delta, params.layers[l].weights);
#pragma omp parallel for schedule(static)
      for (int i = 0; i < next.rows; ++i) {
        double* nrow = next.row_ptr(i);
        const double* arow = a_prev.row_ptr(i);
        for (int j = 0; j < next.cols; ++j) nrow[j] *= softsign_deriv_from_act(arow[j]);
      }
      delta = std::move(next);
    }
  }
  return loss;
}

void adam_step(MLPParams& params, const MLPParams& grads, AdamState& state) {
  require(params.num_layers() == grads.num_layers() && params.num_layers() == int(state.m.size()),
          "adam_step: layer counts disagree");
  state.t += 1;
  const AdamParams& hp = state.hp;
  const double bc1 = 1.0 - std::pow(hp.beta1, double(state.t));
  const double bc2 = 1.0 - std::pow(hp.beta2, double(state.t));

  auto update = [&](double& theta, double g, double& m, double& v) {
    m = hp.beta1 * m + (1.0 - hp.beta1) * g;
    v = hp.beta2 * v + (1.0 - hp.beta2) * g * g;
    theta -= hp.lr * (m / bc1) / (std::sqrt(v / bc2) + hp.eps);
  };

  for (int l = 0; l < params.num_layers(); ++l) {
    auto& w = params.layers[l].weights.data;
    const auto& gw = grads.layers[l].weights.data;
    auto& mw = state.m[l].weights.data;
    auto& vw = state.v[l].weights.data;
    require(w.size() == gw.size(), "adam_step: weight shapes disagree");
    const std::ptrdiff_t nw = std::ptrdiff_t(w.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < nw; ++i) update(w[i], gw[i], mw[i], vw[i]);

    auto& b = params.layers[l].bias;
    const auto& gb = grads.layers[l].bias;
    auto& mb = state.m[l].bias;
    auto& vb = state.v[l].bias;
    require(b.size() == gb.size(), "adam_step: bias shapes disagree");
    for (std::size_t i = 0; i < b.size(); ++i) update(b[i], gb[i], mb[i], vb[i]);
  }
}

int flat_dim(const MLPParams& params, int layer, bool include_biases) {
  require(layer >= 0 && layer < params.num_layers(), "flat_dim: layer index out of range");
  const auto& l = params.layers[layer];
  return l.weights.rows * l.weights.cols + (include_biases ? int(l.bias.size()) : 0);
}

std::vector<double> flatten_layer(const MLPParams& params, int layer, bool include_biases) {
  require(layer >= 0 && layer < params.num_layers(), "flatten_layer: layer index out of range");
  const auto& l = params.layers[layer];
  std::vector<double> out;
  out.reserve(flat_dim(params, layer, include_biases));
  out.insert(out.end(), l.weights.data.begin(), l.weights.data.end());
  if (include_biases) out.insert(out.end(), l.bias.begin(), l.bias.end());
  return out;
}

void assign_layer(MLPParams& params, int layer, const std::vector<double>& w,
                  bool include_biases) {
  require(layer >= 0 && layer < params.num_layers(), "assign_layer: layer index out of range");
  auto& l = params.layers[layer];
  const std::size_t nw = l.weights.data.size();
  const std::size_t expect = nw + (include_biases ? l.bias.size() : 0);
  if (w.size() != expect) {
    std::ostringstream os;
    os << "assign_layer: expected " << expect << " values for layer " << layer << ", got "
       << w.size();
    throw std::invalid_argument(os.str());
  }
  std::copy(w.begin(), w.begin() + nw, l.weights.data.begin());
  if (include_biases) std::copy(w.begin() + nw, w.end(), l.bias.begin());
}

}  // namespace dmdtrain::nn
