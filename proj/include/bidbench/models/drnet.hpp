#pragma once

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

/// Which of `strata` equal-width bid bins a bid falls into; b = 1 belongs to
/// the last bin.
inline std::size_t stratum_index(double b, std::size_t strata) {
  if (strata == 0) throw ArgumentError("stratum_index: strata must be >= 1");
  if (!(b >= 0.0 && b <= 1.0))
    throw DomainError("bid " + std::to_string(b) + " outside [0,1]");
  return std::min(std::size_t(b * double(strata)), strata - 1);
}

struct DrnetGrid {
  std::vector<std::size_t> strata{10};
  NetGrid net;
};

/// Shared-representation network with one prediction head per bid stratum.
/// The body embeds x; each head receives [representation, b] and serves the
/// bids of its stratum, which lets the response differ sharply across bid
/// levels while the representation stays common.
class DrnetModel final : public ResponseModel {
 public:
  DrnetModel(std::size_t dim, std::size_t width, std::size_t n_heads,
             std::vector<std::size_t> head_of_stratum, std::uint64_t init_seed)
      : strata_(head_of_stratum.size()), head_of_stratum_(std::move(head_of_stratum)) {
    const std::pair<std::size_t, net::Activation> body_layout[] = {
        {width, net::Activation::relu}, {width, net::Activation::relu}};
    body_ = net::LayerStack(store_, dim, body_layout);
    const std::pair<std::size_t, net::Activation> head_layout[] = {
        {width, net::Activation::relu},
        {width, net::Activation::relu},
        {1, net::Activation::sigmoid}};
    heads_.reserve(n_heads);
    for (std::size_t h = 0; h < n_heads; ++h)
      heads_.emplace_back(store_, width + 1, head_layout);

    Rng rng(init_seed);
    Rng body_rng = rng.fork("body");
    body_.init_uniform(store_, body_rng);
    for (std::size_t h = 0; h < heads_.size(); ++h) {
      Rng head_rng = rng.fork("head").fork(h);
      heads_[h].init_uniform(store_, head_rng);
    }
  }

  double predict(double b, std::span<const double> x) const override {
    net::LayerStack::Cache body_cache, head_cache;
    return forward(b, x, body_cache, head_cache);
  }

  double forward(double b, std::span<const double> x, net::LayerStack::Cache& body_cache,
                 net::LayerStack::Cache& head_cache) const {
    const auto rep = body_.forward(store_, x, body_cache);
    std::vector<double> in(rep.begin(), rep.end());
    in.push_back(b);
    return heads_[head_for_bid(b)].forward(store_, in, head_cache)[0];
  }

  std::size_t head_for_bid(double b) const {
    return head_of_stratum_[stratum_index(b, strata_)];
  }

  net::ParamStore& store() { return store_; }
  const net::ParamStore& store() const { return store_; }
  const net::LayerStack& body() const { return body_; }
  const std::vector<net::LayerStack>& heads() const { return heads_; }
  const std::vector<std::size_t>& head_of_stratum() const { return head_of_stratum_; }

  /// Training-side backward for one sample already forwarded via forward().
  void backward(double b, double dz, net::LayerStack::Cache& body_cache,
                net::LayerStack::Cache& head_cache, std::vector<double>& d_head_in,
                std::vector<double>& d_rep) {
    heads_[head_for_bid(b)].backward(store_, head_cache, {&dz, 1}, /*d_is_preact=*/true,
                                     &d_head_in);
    d_rep.assign(d_head_in.begin(), d_head_in.end() - 1);  // drop the bid slot
    body_.backward(store_, body_cache, d_rep, /*d_is_preact=*/false);
  }

 private:
  net::ParamStore store_;
  net::LayerStack body_;
  std::vector<net::LayerStack> heads_;
  std::size_t strata_ = 1;
  std::vector<std::size_t> head_of_stratum_;
};

namespace detail {
/// Map raw strata to heads so every head owns at least one training bid:
/// an empty stratum joins its left neighbor (leading empties join the first
/// occupied one). Returns the mapping and appends one log line per merge.
inline std::vector<std::size_t> merge_empty_strata(const std::vector<double>& bids,
                                                   std::size_t strata,
                                                   std::vector<std::string>* log) {
  std::vector<std::size_t> count(strata, 0);
  for (const double b : bids) ++count[stratum_index(b, strata)];

  std::size_t first_occupied = strata;
  for (std::size_t k = 0; k < strata; ++k)
    if (count[k] > 0) {
      first_occupied = k;
      break;
    }
  if (first_occupied == strata)
    throw DegenerateDataError("no training bids to populate any stratum");

  std::vector<std::size_t> head(strata, 0);
  std::size_t next = 0;
  for (std::size_t k = first_occupied; k < strata; ++k) {
    if (count[k] > 0) {
      head[k] = next++;
    } else {
      head[k] = head[k - 1];
      if (log)
        log->push_back("drnet: stratum " + std::to_string(k) + "/" + std::to_string(strata) +
                       " empty, merged into its left neighbor");
    }
  }
  for (std::size_t k = 0; k < first_occupied; ++k) {
    head[k] = head[first_occupied];
    if (log)
      log->push_back("drnet: stratum " + std::to_string(k) + "/" + std::to_string(strata) +
                     " empty, merged into the first occupied stratum");
  }
  return head;
}
}  // namespace detail

inline FittedModel fit_drnet(const PricingDataset& train, const PricingDataset& validation,
                             const DrnetGrid& grid, std::uint64_t seed,
                             std::vector<std::string>* log = nullptr) {
  const std::size_t n = train.size();
  if (n == 0) throw ArgumentError("fit_drnet: empty training set");
  if (validation.size() == 0) throw ArgumentError("fit_drnet: empty validation set");
  if (grid.strata.empty()) throw ArgumentError("fit_drnet: empty strata grid");
  const std::size_t d = train.covariates.cols;

  std::shared_ptr<DrnetModel> best;
  Hyperparams best_hp;
  double best_brier = std::numeric_limits<double>::infinity();

  const auto entries = grid.net.entries();
  for (const std::size_t strata : grid.strata) {
    const auto head_of_stratum = detail::merge_empty_strata(train.bids, strata, log);
    const std::size_t n_heads =
        1 + *std::max_element(head_of_stratum.begin(), head_of_stratum.end());

    for (std::size_t c = 0; c < entries.size(); ++c) {
      const auto& e = entries[c];
      if (n < e.batch_size)
        throw ArgumentError("fit_drnet: training set smaller than batch size " +
                            std::to_string(e.batch_size));
      const std::string tag = "drnet/" + std::to_string(strata) + "/" + std::to_string(c);
      auto model = std::make_shared<DrnetModel>(d, e.width, n_heads, head_of_stratum,
                                                derive_seed(seed, tag + "/init"));

      net::LayerStack::Cache body_cache, head_cache;
      std::vector<double> d_head_in, d_rep;
      const auto per_sample = [&](std::size_t row) {
        const double b = train.bids[row];
        const double p = model->forward(b, train.covariates.row(row), body_cache, head_cache);
        const double y = double(train.outcomes[row]);
        model->backward(b, p - y, body_cache, head_cache, d_head_in, d_rep);
        return net::bce_term(p, y);
      };

      net::TrainHooks hooks;
      net::LayerStack::Cache vb_cache, vh_cache;
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
        best_hp["strata"] = std::to_string(strata);
      }
    }
  }
  const auto [lo, hi] = bid_range(train);
  return FittedModel(Method::drnet, std::move(best), std::move(best_hp), d, lo, hi);
}

}  // namespace bidbench
