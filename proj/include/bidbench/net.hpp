#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bidbench/errors.hpp"
#include "bidbench/rng.hpp"

// Minimal reverse-mode engine for the three neural estimators. Layers do not
// own their parameters; they hold offsets into a flat ParamStore, which makes
// snapshotting/restoring a model a vector copy and keeps gradient clipping,
// Adam, and serialization trivial.
namespace bidbench::net {

enum class Activation { relu, sigmoid, identity };

inline std::string to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::sigmoid: return "sigmoid";
    default: return "identity";
  }
}

inline Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "sigmoid") return Activation::sigmoid;
  if (s == "identity") return Activation::identity;
  throw ArgumentError("unknown activation '" + s + "'");
}

/// Numerically stable logistic function.
inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

inline double clip_probability(double p) { return std::clamp(p, 1e-7, 1.0 - 1e-7); }

/// Cross-entropy of one Bernoulli observation, with the probability clipped
/// at 1e-7 from both ends.
inline double bce_term(double p, double y) {
  p = clip_probability(p);
  return -(y * std::log(p) + (1.0 - y) * std::log1p(-p));
}

inline double bce_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw ArgumentError("bce_loss: length mismatch");
  if (pred.empty()) throw ArgumentError("bce_loss: empty input");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += bce_term(pred[i], target[i]);
  return s / double(pred.size());
}

struct TrainConfig {
  std::size_t batch_size = 64;
  std::size_t steps = 1000;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
};

/// Flat value/gradient arena shared by every layer of one model.
class ParamStore {
 public:
  std::size_t add(std::size_t count) {
    const std::size_t off = values_.size();
    values_.resize(off + count, 0.0);
    grads_.resize(off + count, 0.0);
    return off;
  }

  std::size_t size() const { return values_.size(); }

  double* value(std::size_t off) { return values_.data() + off; }
  const double* value(std::size_t off) const { return values_.data() + off; }
  double* grad(std::size_t off) { return grads_.data() + off; }
  const double* grad(std::size_t off) const { return grads_.data() + off; }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<double>& grads() const { return grads_; }

  void zero_grad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

  void scale_grad(double s) {
    for (double& g : grads_) g *= s;
  }

  double grad_norm() const {
    double ss = 0.0;
    for (const double g : grads_) ss += g * g;
    return std::sqrt(ss);
  }

  /// Rescale the whole gradient when its global norm exceeds max_norm.
  void clip_grad(double max_norm) {
    const double norm = grad_norm();
    if (norm > max_norm && norm > 0.0) scale_grad(max_norm / norm);
  }

 private:
  std::vector<double> values_;
  std::vector<double> grads_;
};

namespace detail {
inline double activate(Activation a, double z) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? z : 0.0;
    case Activation::sigmoid: return sigmoid(z);
    default: return z;
  }
}
/// d(activation)/d(pre-activation), from the cached pre-activation z and
/// output y.
inline double activation_slope(Activation a, double z, double y) {
  switch (a) {
    case Activation::relu: return z > 0.0 ? 1.0 : 0.0;
    case Activation::sigmoid: return y * (1.0 - y);
    default: return 1.0;
  }
}
}  // namespace detail

/// Fully connected layer. Weights are row-major [out][in] at w_offset, biases
/// [out] at b_offset, both inside the shared store.
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(ParamStore& store, std::size_t in, std::size_t out, Activation act)
      : in_(in), out_(out), act_(act), w_(store.add(in * out)), b_(store.add(out)) {
    if (in == 0 || out == 0) throw ArgumentError("DenseLayer: zero dimension");
  }

  /// Uniform fan-in initialization: weights ~ U(+/- 1/sqrt(in)), biases 0.
  void init_uniform(ParamStore& store, Rng& rng) const {
    const double bound = 1.0 / std::sqrt(double(in_));
    double* w = store.value(w_);
    for (std::size_t i = 0; i < in_ * out_; ++i) w[i] = rng.uniform(-bound, bound);
    double* b = store.value(b_);
    for (std::size_t j = 0; j < out_; ++j) b[j] = 0.0;
  }

  void forward(const ParamStore& store, const double* x, double* z, double* y) const {
    const double* w = store.value(w_);
    const double* b = store.value(b_);
    for (std::size_t j = 0; j < out_; ++j) {
      const double* wr = w + j * in_;
      double s = b[j];
      for (std::size_t i = 0; i < in_; ++i) s += wr[i] * x[i];
      z[j] = s;
      y[j] = detail::activate(act_, s);
    }
  }

  /// Accumulate parameter gradients for upstream signal dy = dL/dy (or
  /// dL/dz when dy_is_preact -- used to fuse sigmoid + BCE at the output).
  /// dx, when non-null, must be zeroed by the caller and receives dL/dx.
  void backward(ParamStore& store, const double* x, const double* z, const double* y,
                const double* dy, bool dy_is_preact, double* dx) const {
    const double* w = store.value(w_);
    double* wg = store.grad(w_);
    double* bg = store.grad(b_);
    for (std::size_t j = 0; j < out_; ++j) {
      const double g =
          dy_is_preact ? dy[j] : dy[j] * detail::activation_slope(act_, z[j], y[j]);
      if (g == 0.0) continue;
      bg[j] += g;
      const double* wr = w + j * in_;
      double* wgr = wg + j * in_;
      for (std::size_t i = 0; i < in_; ++i) wgr[i] += g * x[i];
      if (dx)
        for (std::size_t i = 0; i < in_; ++i) dx[i] += g * wr[i];
    }
  }

  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  Activation activation() const { return act_; }
  std::size_t weight_offset() const { return w_; }
  std::size_t bias_offset() const { return b_; }

 private:
  std::size_t in_ = 0, out_ = 0;
  Activation act_ = Activation::identity;
  std::size_t w_ = 0, b_ = 0;
};

/// A chain of dense layers plus the per-sample activation caches needed for
/// backprop. Holds offsets only; safe to copy along with its store.
class LayerStack {
 public:
  /// Scratch space for one sample's forward/backward pass; reused across
  /// samples to keep the training loop allocation-free.
  struct Cache {
    std::vector<double> input;
    std::vector<std::vector<double>> z, y, d;
  };

  LayerStack() = default;
  LayerStack(ParamStore& store, std::size_t input_dim,
             std::span<const std::pair<std::size_t, Activation>> layout) {
    if (layout.empty()) throw ArgumentError("LayerStack: empty layout");
    std::size_t in = input_dim;
    layers_.reserve(layout.size());
    for (const auto& [out, act] : layout) {
      layers_.emplace_back(store, in, out, act);
      in = out;
    }
  }

  void init_uniform(ParamStore& store, Rng& rng) const {
    for (const auto& l : layers_) l.init_uniform(store, rng);
  }

  std::span<const double> forward(const ParamStore& store, std::span<const double> input,
                                  Cache& cache) const {
    if (input.size() != layers_.front().in())
      throw ArgumentError("forward: input length " + std::to_string(input.size()) +
                          " does not match first layer width " +
                          std::to_string(layers_.front().in()));
    cache.input.assign(input.begin(), input.end());
    cache.z.resize(layers_.size());
    cache.y.resize(layers_.size());
    const double* x = cache.input.data();
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      cache.z[l].resize(layers_[l].out());
      cache.y[l].resize(layers_[l].out());
      layers_[l].forward(store, x, cache.z[l].data(), cache.y[l].data());
      x = cache.y[l].data();
    }
    return cache.y.back();
  }

  /// Reverse pass over the cached sample. d_final is dL/d(output), or
  /// dL/d(final pre-activation) when d_is_preact. d_input, when non-null, is
  /// resized/zeroed and receives dL/d(input).
  void backward(ParamStore& store, Cache& cache, std::span<const double> d_final,
                bool d_is_preact, std::vector<double>* d_input = nullptr) const {
    if (d_final.size() != layers_.back().out())
      throw ArgumentError("backward: gradient length mismatch");
    cache.d.resize(layers_.size());
    cache.d.back().assign(d_final.begin(), d_final.end());
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const double* x = l == 0 ? cache.input.data() : cache.y[l - 1].data();
      double* dx = nullptr;
      if (l > 0) {
        cache.d[l - 1].assign(layers_[l - 1].out(), 0.0);
        dx = cache.d[l - 1].data();
      } else if (d_input) {
        d_input->assign(layers_[0].in(), 0.0);
        dx = d_input->data();
      }
      const bool preact = d_is_preact && l + 1 == layers_.size();
      layers_[l].backward(store, x, cache.z[l].data(), cache.y[l].data(),
                          cache.d[l].data(), preact, dx);
    }
  }

  std::size_t input_dim() const { return layers_.front().in(); }
  std::size_t output_dim() const { return layers_.back().out(); }
  const std::vector<DenseLayer>& layers() const { return layers_; }

 private:
  std::vector<DenseLayer> layers_;
};

/// Dense layer whose every weight and bias is a linear function of a 5-entry
/// bid basis: W_ij(b) = theta_ij . basis(b). Parameters live at
/// [out][in][5] (theta) and [out][5] (bias coefficients).
class VcLayer {
 public:
  static constexpr std::size_t kBasis = 5;

  /// Per-sample scratch: the materialized weight matrix for this sample's
  /// basis is kept so backward need not recontract it.
  struct Cache {
    std::vector<double> w, z, y;
  };

  VcLayer() = default;
  VcLayer(ParamStore& store, std::size_t in, std::size_t out, Activation act)
      : in_(in), out_(out), act_(act), theta_(store.add(in * out * kBasis)),
        bias_(store.add(out * kBasis)) {
    if (in == 0 || out == 0) throw ArgumentError("VcLayer: zero dimension");
  }

  void init_uniform(ParamStore& store, Rng& rng) const {
    const double bound = 1.0 / std::sqrt(double(in_));
    double* th = store.value(theta_);
    for (std::size_t i = 0; i < in_ * out_ * kBasis; ++i) th[i] = rng.uniform(-bound, bound);
    double* bc = store.value(bias_);
    for (std::size_t i = 0; i < out_ * kBasis; ++i) bc[i] = 0.0;
  }

  void forward(const ParamStore& store, const double* x, const double* basis,
               Cache& cache) const {
    cache.w.resize(out_ * in_);
    cache.z.resize(out_);
    cache.y.resize(out_);
    const double* th = store.value(theta_);
    const double* bc = store.value(bias_);
    for (std::size_t j = 0; j < out_; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < kBasis; ++k) s += bc[j * kBasis + k] * basis[k];
      double* wr = cache.w.data() + j * in_;
      const double* tr = th + j * in_ * kBasis;
      for (std::size_t i = 0; i < in_; ++i) {
        const double* t = tr + i * kBasis;
        double w = 0.0;
        for (std::size_t k = 0; k < kBasis; ++k) w += t[k] * basis[k];
        wr[i] = w;
        s += w * x[i];
      }
      cache.z[j] = s;
      cache.y[j] = detail::activate(act_, s);
    }
  }

  void backward(ParamStore& store, const double* x, const double* basis, const Cache& cache,
                const double* dy, bool dy_is_preact, double* dx) const {
    double* thg = store.grad(theta_);
    double* bcg = store.grad(bias_);
    for (std::size_t j = 0; j < out_; ++j) {
      const double g = dy_is_preact
                           ? dy[j]
                           : dy[j] * detail::activation_slope(act_, cache.z[j], cache.y[j]);
      if (g == 0.0) continue;
      for (std::size_t k = 0; k < kBasis; ++k) bcg[j * kBasis + k] += g * basis[k];
      const double* wr = cache.w.data() + j * in_;
      double* tgr = thg + j * in_ * kBasis;
      for (std::size_t i = 0; i < in_; ++i) {
        const double gx = g * x[i];
        double* t = tgr + i * kBasis;
        for (std::size_t k = 0; k < kBasis; ++k) t[k] += gx * basis[k];
        if (dx) dx[i] += g * wr[i];
      }
    }
  }

  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  Activation activation() const { return act_; }
  std::size_t theta_offset() const { return theta_; }
  std::size_t bias_offset() const { return bias_; }

 private:
  std::size_t in_ = 0, out_ = 0;
  Activation act_ = Activation::identity;
  std::size_t theta_ = 0, bias_ = 0;
};

/// Plain feed-forward network owning its parameters; the workhorse behind the
/// MLP estimator and the DRNet body/heads.
class DenseNetwork {
 public:
  DenseNetwork() = default;
  DenseNetwork(std::size_t input_dim, std::vector<std::pair<std::size_t, Activation>> layout,
               std::uint64_t init_seed) {
    stack_ = LayerStack(store_, input_dim, layout);
    Rng rng(init_seed);
    stack_.init_uniform(store_, rng);
  }

  std::vector<double> forward(std::span<const double> input) const {
    LayerStack::Cache cache;
    const auto out = stack_.forward(store_, input, cache);
    return {out.begin(), out.end()};
  }

  ParamStore& store() { return store_; }
  const ParamStore& store() const { return store_; }
  const LayerStack& stack() const { return stack_; }
  LayerStack& stack() { return stack_; }
  std::size_t parameter_count() const { return store_.size(); }

 private:
  ParamStore store_;
  LayerStack stack_;
};

/// Adam with the usual constants; the search grids only vary the base rate.
class Adam {
 public:
  explicit Adam(std::size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(ParamStore& store, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(kBeta1, double(t_));
    const double bc2 = 1.0 - std::pow(kBeta2, double(t_));
    auto& values = store.values();
    const auto& grads = store.grads();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i];
      m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * g;
      v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * g * g;
      values[i] -= lr * (m_[i] / bc1) / (std::sqrt(v_[i] / bc2) + kEps);
    }
  }

 private:
  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  std::vector<double> m_, v_;
  std::uint64_t t_ = 0;
};

struct TrainHooks {
  /// Validation BCE of the current parameters; enables best-checkpoint
  /// selection when set.
  std::function<double()> validation_bce;
  /// Observation hook, called at every checkpoint step (tests use it).
  std::function<void(std::size_t step)> on_checkpoint;
};

struct TrainResult {
  double final_loss = 0.0;
  double best_validation_bce = std::numeric_limits<double>::quiet_NaN();
  std::size_t best_step = 0;
};

/// Generic minibatch BCE driver shared by the MLP, DRNet, and VCNet fits.
///
/// per_sample(row) must run the model forward on training row `row`,
/// accumulate parameter gradients for dz = p - y (the BCE gradient w.r.t.
/// the final pre-activation), and return that sample's BCE. The driver
/// averages gradients over the batch, clips at global norm 10, applies Adam,
/// and checkpoints validation BCE at step 0, every 100 steps, and after the
/// final step, restoring the best checkpoint's parameters at the end.
template <class PerSample>
TrainResult train_minibatch_bce(ParamStore& store, std::size_t n_train, const TrainConfig& cfg,
                                PerSample&& per_sample, const TrainHooks& hooks = {}) {
  if (n_train == 0) throw ArgumentError("train: empty training data");
  if (cfg.batch_size == 0 || cfg.steps == 0 || !(cfg.learning_rate > 0.0))
    throw ArgumentError("train: batch_size, steps, learning_rate must be positive");

  Adam adam(store.size());
  Rng batches(cfg.seed);
  TrainResult result;
  std::vector<double> best_params;
  double best = std::numeric_limits<double>::infinity();

  const auto checkpoint = [&](std::size_t step) {
    if (hooks.on_checkpoint) hooks.on_checkpoint(step);
    if (!hooks.validation_bce) return;
    const double v = hooks.validation_bce();
    if (v < best) {
      best = v;
      best_params = store.values();
      result.best_step = step;
    }
  };

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    if (step % 100 == 0) checkpoint(step);
    store.zero_grad();
    double loss = 0.0;
    for (std::size_t k = 0; k < cfg.batch_size; ++k)
      loss += per_sample(std::size_t(batches.below(n_train)));
    loss /= double(cfg.batch_size);
    if (!std::isfinite(loss))
      throw TrainingError("training diverged at step " + std::to_string(step));
    store.scale_grad(1.0 / double(cfg.batch_size));
    store.clip_grad(10.0);
    adam.step(store, cfg.learning_rate);
    result.final_loss = loss;
  }
  checkpoint(cfg.steps);

  if (hooks.validation_bce && !best_params.empty()) {
    store.values() = best_params;
    result.best_validation_bce = best;
  }
  return result;
}

}  // namespace bidbench::net
