#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bidbench/format.hpp"
#include "bidbench/models/common.hpp"
#include "bidbench/net.hpp"

namespace bidbench {

/// Hyperparameter grid shared by the dense-network estimators (the
/// varying-coefficient network reuses it; the multi-head network adds its
/// strata count on top).
struct NetGrid {
  std::vector<std::size_t> width{32, 48};
  std::vector<std::size_t> batch_size{64, 128};
  std::vector<std::size_t> steps{1000, 2000};
  std::vector<double> learning_rate{0.01, 0.05};

  struct Entry {
    std::size_t width, batch_size, steps;
    double learning_rate;
  };

  /// Grid members in a fixed enumeration order (width, batch, steps, rate);
  /// ties in the tuning criterion resolve toward the earlier entry.
  std::vector<Entry> entries() const {
    if (width.empty() || batch_size.empty() || steps.empty() || learning_rate.empty())
      throw ArgumentError("NetGrid: empty grid dimension");
    std::vector<Entry> out;
    for (const auto w : width)
      for (const auto b : batch_size)
        for (const auto s : steps)
          for (const auto lr : learning_rate) out.push_back({w, b, s, lr});
    return out;
  }
};

inline Hyperparams to_hyperparams(const NetGrid::Entry& e) {
  return {{"width", std::to_string(e.width)},
          {"batch_size", std::to_string(e.batch_size)},
          {"steps", std::to_string(e.steps)},
          {"learning_rate", fmt_g17(e.learning_rate)}};
}

namespace detail {
/// Flatten a dataset into per-row [x, b] inputs for the dense estimators.
inline std::vector<double> concat_inputs(const PricingDataset& ds) {
  const std::size_t d = ds.covariates.cols;
  std::vector<double> inputs(ds.size() * (d + 1));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto x = ds.covariates.row(i);
    double* row = inputs.data() + i * (d + 1);
    std::copy(x.begin(), x.end(), row);
    row[d] = ds.bids[i];
  }
  return inputs;
}
}  // namespace detail

/// Two-hidden-layer ReLU network with sigmoid output on the input [x, b].
class MlpModel final : public ResponseModel {
 public:
  explicit MlpModel(net::DenseNetwork network) : network_(std::move(network)) {}

  double predict(double b, std::span<const double> x) const override {
    std::vector<double> in(x.begin(), x.end());
    in.push_back(b);
    return network_.forward(in)[0];
  }

  const net::DenseNetwork& network() const { return network_; }

 private:
  net::DenseNetwork network_;
};

inline FittedModel fit_mlp(const PricingDataset& train, const PricingDataset& validation,
                           const NetGrid& grid, std::uint64_t seed) {
  const std::size_t n = train.size();
  if (n == 0) throw ArgumentError("fit_mlp: empty training set");
  if (validation.size() == 0) throw ArgumentError("fit_mlp: empty validation set");
  const std::size_t d = train.covariates.cols;
  const std::size_t in_dim = d + 1;
  const std::vector<double> inputs = detail::concat_inputs(train);
  const std::vector<double> val_inputs = detail::concat_inputs(validation);

  std::shared_ptr<MlpModel> best;
  Hyperparams best_hp;
  double best_brier = std::numeric_limits<double>::infinity();

  const auto entries = grid.entries();
  for (std::size_t c = 0; c < entries.size(); ++c) {
    const auto& e = entries[c];
    if (n < e.batch_size)
      throw ArgumentError("fit_mlp: training set smaller than batch size " +
                          std::to_string(e.batch_size));
    const std::string tag = "mlp/" + std::to_string(c);
    net::DenseNetwork network(in_dim,
                              {{e.width, net::Activation::relu},
                               {e.width, net::Activation::relu},
                               {1, net::Activation::sigmoid}},
                              derive_seed(seed, tag + "/init"));

    net::LayerStack::Cache cache;
    const auto per_sample = [&](std::size_t row) {
      const std::span<const double> in(inputs.data() + row * in_dim, in_dim);
      const double p = network.stack().forward(network.store(), in, cache)[0];
      const double y = double(train.outcomes[row]);
      const double dz = p - y;
      network.stack().backward(network.store(), cache, {&dz, 1}, /*d_is_preact=*/true);
      return net::bce_term(p, y);
    };

    net::TrainHooks hooks;
    net::LayerStack::Cache val_cache;
    hooks.validation_bce = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < validation.size(); ++i) {
        const std::span<const double> in(val_inputs.data() + i * in_dim, in_dim);
        const double p = network.stack().forward(network.store(), in, val_cache)[0];
        s += net::bce_term(p, double(validation.outcomes[i]));
      }
      return s / double(validation.size());
    };

    const net::TrainConfig cfg{e.batch_size, e.steps, e.learning_rate,
                               derive_seed(seed, tag + "/sgd")};
    net::train_minibatch_bce(network.store(), n, cfg, per_sample, hooks);

    auto model = std::make_shared<MlpModel>(std::move(network));
    const double brier = validation_brier(*model, validation);
    if (brier < best_brier) {
      best_brier = brier;
      best = std::move(model);
      best_hp = to_hyperparams(e);
    }
  }
  const auto [lo, hi] = bid_range(train);
  return FittedModel(Method::mlp, std::move(best), std::move(best_hp), d, lo, hi);
}

}  // namespace bidbench
