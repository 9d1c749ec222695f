#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bidbench/models/common.hpp"
#include "bidbench/models/mlp.hpp"
#include "bidbench/net.hpp"

namespace bidbench {

/// Truncated-polynomial spline basis of the bid: degree 2 with knots at 1/3
/// and 2/3, so the head weights are piecewise-quadratic, continuous functions
/// of b.
inline std::array<double, 5> spline_basis(double b) {
  if (!(b >= 0.0 && b <= 1.0))
    throw DomainError("bid " + std::to_string(b) + " outside [0,1]");
  const double k1 = b > 1.0 / 3.0 ? b - 1.0 / 3.0 : 0.0;
  const double k2 = b > 2.0 / 3.0 ? b - 2.0 / 3.0 : 0.0;
  return {1.0, b, b * b, k1 * k1, k2 * k2};
}

struct VcnetGrid {
  NetGrid net;  // same search space as the multi-head estimator, minus strata
};

/// Varying-coefficient network: a dense body embeds x, then an inference head
/// whose every weight is a spline function of the bid produces the response.
/// The bid enters only through the (continuous) basis, so the fitted curve is
/// continuous in b by construction.
class VcnetModel final : public ResponseModel {
 public:
  struct HeadCache {
    std::vector<net::VcLayer::Cache> layers;
    std::vector<std::vector<double>> d;  // backward scratch per layer
  };

  VcnetModel(std::size_t dim, std::size_t width, std::uint64_t init_seed) {
    const std::pair<std::size_t, net::Activation> body_layout[] = {
        {width, net::Activation::relu}, {width, net::Activation::relu}};
    body_ = net::LayerStack(store_, dim, body_layout);
    head_.reserve(3);
    head_.emplace_back(store_, width, width, net::Activation::relu);
    head_.emplace_back(store_, width, width, net::Activation::relu);
    head_.emplace_back(store_, width, 1, net::Activation::sigmoid);

    Rng rng(init_seed);
    Rng body_rng = rng.fork("body");
    body_.init_uniform(store_, body_rng);
    for (std::size_t l = 0; l < head_.size(); ++l) {
      Rng head_rng = rng.fork("head").fork(l);
      head_[l].init_uniform(store_, head_rng);
    }
  }

  double predict(double b, std::span<const double> x) const override {
    net::LayerStack::Cache body_cache;
    HeadCache head_cache;
    return forward(b, x, body_cache, head_cache);
  }

  double forward(double b, std::span<const double> x, net::LayerStack::Cache& body_cache,
                 HeadCache& head_cache) const {
    const auto basis = spline_basis(b);
    const auto rep = body_.forward(store_, x, body_cache);
    head_cache.layers.resize(head_.size());
    const double* in = rep.data();
    for (std::size_t l = 0; l < head_.size(); ++l) {
      head_[l].forward(store_, in, basis.data(), head_cache.layers[l]);
      in = head_cache.layers[l].y.data();
    }
    return head_cache.layers.back().y[0];
  }

  /// Training-side backward for one sample already forwarded via forward().
  void backward(double b, double dz, net::LayerStack::Cache& body_cache,
                HeadCache& head_cache, std::vector<double>& d_rep) {
    const auto basis = spline_basis(b);
    head_cache.d.resize(head_.size());
    head_cache.d.back().assign(1, dz);
    for (std::size_t l = head_.size(); l-- > 0;) {
      const double* in = l == 0 ? body_cache.y.back().data() : head_cache.layers[l - 1].y.data();
      double* dx = nullptr;
      if (l > 0) {
        head_cache.d[l - 1].assign(head_[l - 1].out(), 0.0);
        dx = head_cache.d[l - 1].data();
      } else {
        d_rep.assign(head_[0].in(), 0.0);
        dx = d_rep.data();
      }
      head_[l].backward(store_, in, basis.data(), head_cache.layers[l],
                        head_cache.d[l].data(), /*dy_is_preact=*/l + 1 == head_.size(), dx);
    }
    body_.backward(store_, body_cache, d_rep, /*d_is_preact=*/false);
  }

  net::ParamStore& store() { return store_; }
  const net::ParamStore& store() const { return store_; }
  const net::LayerStack& body() const { return body_; }
  const std::vector<net::VcLayer>& head() const { return head_; }

 private:
  net::ParamStore store_;
  net::LayerStack body_;
  std::vector<net::VcLayer> head_;
};

inline FittedModel fit_vcnet(const PricingDataset& train, const PricingDataset& validation,
                             const VcnetGrid& grid, std::uint64_t seed) {
  const std::size_t n = train.size();
  if (n == 0) throw ArgumentError("fit_vcnet: empty training set");
  if (validation.size() == 0) throw ArgumentError("fit_vcnet: empty validation set");
  const std::size_t d = train.covariates.cols;

  std::shared_ptr<VcnetModel> best;
  Hyperparams best_hp;
  double best_brier = std::numeric_limits<double>::infinity();

  const auto entries = grid.net.entries();
  for (std::size_t c = 0; c < entries.size(); ++c) {
    const auto& e = entries[c];
    if (n < e.batch_size)
      throw ArgumentError("fit_vcnet: training set smaller than batch size " +
                          std::to_string(e.batch_size));
    const std::string tag = "vcnet/" + std::to_string(c);
    auto model = std::make_shared<VcnetModel>(d, e.width, derive_seed(seed, tag + "/init"));

    net::LayerStack::Cache body_cache;
    VcnetModel::HeadCache head_cache;
    std::vector<double> d_rep;
    const auto per_sample = [&](std::size_t row) {
      const double b = train.bids[row];
      const double p = model->forward(b, train.covariates.row(row), body_cache, head_cache);
      const double y = double(train.outcomes[row]);
      model->backward(b, p - y, body_cache, head_cache, d_rep);
      return net::bce_term(p, y);
    };

    net::TrainHooks hooks;
    net::LayerStack::Cache vb_cache;
    VcnetModel::HeadCache vh_cache;
    hooks.validation_bce = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < validation.size(); ++i) {
        const double p = model->forward(validation.bids[i], validation.covariates.row(i),
                                        vb_cache, vh_cache);
        s += net::bce_term(p, double(validation.outcomes[i]));
      }
      return s / double(validation.size());
    };

    const net::TrainConfig cfg{e.batch_size, e.steps, e.learning_rate,
                               derive_seed(seed, tag + "/sgd")};
    net::train_minibatch_bce(model->store(), n, cfg, per_sample, hooks);

    const double brier = validation_brier(*model, validation);
    if (brier < best_brier) {
      best_brier = brier;
      best = std::move(model);
      best_hp = to_hyperparams(e);
    }
  }
  const auto [lo, hi] = bid_range(train);
  return FittedModel(Method::vcnet, std::move(best), std::move(best_hp), d, lo, hi);
}

}  // namespace bidbench
