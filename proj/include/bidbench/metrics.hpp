#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bidbench/dataset.hpp"
#include "bidbench/errors.hpp"
#include "bidbench/models/common.hpp"

namespace bidbench {

/// Uniform evaluation grid over the training bid range: counterfactual
/// queries are meaningful only between the lowest and highest bid the models
/// actually saw.
struct BidGrid {
  double b_min = 0.0, b_max = 1.0;
  std::size_t points = 65;
  std::vector<double> values;

  static BidGrid uniform(double lo, double hi, std::size_t points = 65) {
    if (points < 2) throw ArgumentError("BidGrid: need at least 2 points");
    if (!(hi > lo)) throw ArgumentError("BidGrid: b_max must exceed b_min");
    BidGrid g;
    g.b_min = lo;
    g.b_max = hi;
    g.points = points;
    g.values.resize(points);
    for (std::size_t i = 0; i < points; ++i)
      g.values[i] = lo + (hi - lo) * double(i) / double(points - 1);
    g.values.back() = hi;
    return g;
  }

  static BidGrid from_training(const PricingDataset& train, std::size_t points = 65) {
    const auto [lo, hi] = bid_range(train);
    return uniform(lo, hi, points);
  }

  double spacing() const { return (b_max - b_min) / double(points - 1); }
  double clamp(double b) const { return std::clamp(b, b_min, b_max); }
};

/// Composite trapezoid rule over uniformly spaced samples.
inline double trapezoid(std::span<const double> ys, double spacing) {
  if (ys.size() < 2) throw ArgumentError("trapezoid: need at least 2 samples");
  double s = 0.5 * (ys.front() + ys.back());
  for (std::size_t i = 1; i + 1 < ys.size(); ++i) s += ys[i];
  return s * spacing;
}

namespace detail {
inline void require_response(const FittedModel& model, const char* metric) {
  if (!model.supports_response())
    throw NotApplicableError(std::string(metric) + " not applicable: the " +
                             to_string(model.method()) + " model has no response function");
}

template <class Weight>
double integrated_squared_error(const FittedModel& model, const PricingDataset& test,
                                const ResponseFn& truth, const BidGrid& grid, Weight&& weight) {
  if (test.size() == 0) throw ArgumentError("metric over an empty test set");
  std::vector<double> integrand(grid.points);
  double total = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto x = test.covariates.row(i);
    for (std::size_t k = 0; k < grid.points; ++k) {
      const double b = grid.values[k];
      const double e = weight(b) * (truth(b, x) - model.predict_response(b, x));
      integrand[k] = e * e;
    }
    total += trapezoid(integrand, grid.spacing());
  }
  return total / double(test.size());
}
}  // namespace detail

/// Mean integrated squared error of the fitted response curve against the
/// noiseless truth, integrated over the grid and averaged over test rows.
inline double mise(const FittedModel& model, const PricingDataset& test, const ResponseFn& truth,
                   const BidGrid& grid) {
  detail::require_response(model, "mise");
  return detail::integrated_squared_error(model, test, truth, grid, [](double) { return 1.0; });
}

/// Same integral taken over expected revenue b*mu rather than the response.
inline double mise_revenue(const FittedModel& model, const PricingDataset& test,
                           const ResponseFn& truth, const BidGrid& grid) {
  detail::require_response(model, "mise_r");
  return detail::integrated_squared_error(model, test, truth, grid, [](double b) { return b; });
}

/// Grid argmax of expected revenue b * responder(b); ties break toward the
/// lower bid (conservative pricing).
inline double optimal_bid(const std::function<double(double)>& responder, const BidGrid& grid) {
  double best_b = grid.values.front();
  double best_rev = grid.values.front() * responder(grid.values.front());
  for (std::size_t k = 1; k < grid.points; ++k) {
    const double b = grid.values[k];
    const double rev = b * responder(b);
    if (rev > best_rev) {
      best_rev = rev;
      best_b = b;
    }
  }
  return best_b;
}

/// Mean squared distance between the truth-optimal bid and the bid the model
/// would propose. The naive policy proposes the factual bid of each test row;
/// response models propose their own grid argmax.
inline double policy_error(const FittedModel& model, const PricingDataset& test,
                           const ResponseFn& truth, const BidGrid& grid) {
  if (test.size() == 0) throw ArgumentError("metric over an empty test set");
  double s = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto x = test.covariates.row(i);
    const double b_star = optimal_bid([&](double b) { return truth(b, x); }, grid);
    const double b_hat =
        model.supports_response()
            ? optimal_bid([&](double b) { return model.predict_response(b, x); }, grid)
            : test.bids[i];
    const double e = b_star - b_hat;
    s += e * e;
  }
  return s / double(test.size());
}

/// Mean squared error against the factual outcomes at the factual bids.
inline double brier(const FittedModel& model, const PricingDataset& test) {
  detail::require_response(model, "brier");
  if (test.size() == 0) throw ArgumentError("metric over an empty test set");
  double s = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double p = model.predict_response(test.bids[i], test.covariates.row(i));
    const double e = double(test.outcomes[i]) - p;
    s += e * e;
  }
  return s / double(test.size());
}

/// Brier with factual bids clamped into the evaluation range -- the pipeline
/// form, where bids outside the training range are not meaningful queries.
inline double brier(const FittedModel& model, const PricingDataset& test, const BidGrid& grid) {
  detail::require_response(model, "brier");
  if (test.size() == 0) throw ArgumentError("metric over an empty test set");
  double s = 0.0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double p = model.predict_response(grid.clamp(test.bids[i]), test.covariates.row(i));
    const double e = double(test.outcomes[i]) - p;
    s += e * e;
  }
  return s / double(test.size());
}

/// Flat metric record; absent fields mark metrics the method cannot produce
/// (the naive policy has policy error only).
struct MetricsReport {
  std::optional<double> mise, mise_r, pe, bs;

  std::vector<std::pair<std::string, double>> key_values() const {
    std::vector<std::pair<std::string, double>> kv;
    if (mise) kv.emplace_back("mise", *mise);
    if (mise_r) kv.emplace_back("mise_r", *mise_r);
    if (pe) kv.emplace_back("pe", *pe);
    if (bs) kv.emplace_back("bs", *bs);
    return kv;
  }

  std::optional<double> by_name(const std::string& metric) const {
    if (metric == "mise") return mise;
    if (metric == "mise_r") return mise_r;
    if (metric == "pe") return pe;
    if (metric == "bs") return bs;
    throw ArgumentError("unknown metric '" + metric + "'");
  }
};

inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"mise", "mise_r", "pe", "bs"};
  return names;
}

/// All applicable metrics of one fitted model on a test split that carries
/// its generating ground truth.
inline MetricsReport evaluate_model(const FittedModel& model, const PricingDataset& test,
                                    const BidGrid& grid) {
  if (!test.truth) throw ArgumentError("evaluate_model: test set carries no ground truth");
  const ResponseFn truth = response_fn(*test.truth);
  MetricsReport report;
  report.pe = policy_error(model, test, truth, grid);
  if (model.supports_response()) {
    report.mise = mise(model, test, truth, grid);
    report.mise_r = mise_revenue(model, test, truth, grid);
    report.bs = brier(model, test, grid);
  }
  return report;
}

}  // namespace bidbench
