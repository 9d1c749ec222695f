#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bidbench/dataset.hpp"
#include "bidbench/errors.hpp"

namespace bidbench {

/// The seven benchmarked bid-response methods, plus a ground-truth oracle
/// that exists for diagnostics only (it is never part of the benchmark set).
enum class Method { naive, logistic, random_forest, mlp, hie, drnet, vcnet, oracle };

inline std::string to_string(Method m) {
  switch (m) {
    case Method::naive: return "naive";
    case Method::logistic: return "logistic";
    case Method::random_forest: return "random_forest";
    case Method::mlp: return "mlp";
    case Method::hie: return "hie";
    case Method::drnet: return "drnet";
    case Method::vcnet: return "vcnet";
    default: return "oracle";
  }
}

inline Method method_from_string(const std::string& s) {
  for (const Method m : {Method::naive, Method::logistic, Method::random_forest, Method::mlp,
                         Method::hie, Method::drnet, Method::vcnet, Method::oracle})
    if (to_string(m) == s) return m;
  if (s == "random-forest" || s == "rf") return Method::random_forest;
  throw ArgumentError("unknown method '" + s + "'");
}

/// The benchmark lineup, in table-row order.
inline std::vector<Method> benchmark_methods() {
  return {Method::naive,  Method::logistic, Method::random_forest, Method::mlp,
          Method::hie,    Method::drnet,    Method::vcnet};
}

/// Chosen hyperparameters as an ordered record, rendered "k=v;k=v".
using Hyperparams = std::map<std::string, std::string>;

inline std::string to_string(const Hyperparams& hp) {
  std::string out;
  for (const auto& [k, v] : hp) {
    if (!out.empty()) out += ';';
    out += k + "=" + v;
  }
  return out;
}

/// Interface of a fitted response surface: mu_hat(b, x).
class ResponseModel {
 public:
  virtual ~ResponseModel() = default;
  virtual double predict(double b, std::span<const double> x) const = 0;
};

/// A trained estimator: method tag, the (possibly absent) response surface,
/// the chosen hyperparameters, and the training bid range that downstream
/// metrics evaluate over.
class FittedModel {
 public:
  FittedModel() = default;
  FittedModel(Method method, std::shared_ptr<const ResponseModel> impl, Hyperparams chosen,
              std::size_t dim, double train_bid_min, double train_bid_max)
      : method_(method), impl_(std::move(impl)), chosen_(std::move(chosen)), dim_(dim),
        bid_min_(train_bid_min), bid_max_(train_bid_max) {}

  Method method() const { return method_; }
  bool supports_response() const { return impl_ != nullptr; }
  const Hyperparams& chosen_hyperparameters() const { return chosen_; }
  std::size_t dim() const { return dim_; }
  double train_bid_min() const { return bid_min_; }
  double train_bid_max() const { return bid_max_; }
  const ResponseModel* impl() const { return impl_.get(); }

  /// mu_hat(b, x) in [0,1]. The naive policy has no response surface -- the
  /// "n.a." cells of the summary tables.
  double predict_response(double b, std::span<const double> x) const {
    if (!impl_)
      throw NotApplicableError("the " + to_string(method_) + " model has no response function");
    if (!(b >= 0.0 && b <= 1.0))
      throw DomainError("bid " + std::to_string(b) + " outside [0,1]");
    if (x.size() != dim_)
      throw ArgumentError("covariate row has " + std::to_string(x.size()) + " entries, model expects " +
                          std::to_string(dim_));
    return std::clamp(impl_->predict(b, x), 0.0, 1.0);
  }

 private:
  Method method_ = Method::naive;
  std::shared_ptr<const ResponseModel> impl_;
  Hyperparams chosen_;
  std::size_t dim_ = 0;
  double bid_min_ = 0.0, bid_max_ = 1.0;
};

/// Lowest/highest factual bid of a dataset.
inline std::pair<double, double> bid_range(const PricingDataset& ds) {
  if (ds.size() == 0) throw ArgumentError("bid_range: empty dataset");
  const auto [lo, hi] = std::minmax_element(ds.bids.begin(), ds.bids.end());
  return {*lo, *hi};
}

/// Mean squared error of a candidate response surface against the factual
/// outcomes of a (validation) set -- the tuning criterion. Factual metrics
/// are the only feasible criterion without counterfactuals.
inline double validation_brier(const ResponseModel& model, const PricingDataset& val) {
  if (val.size() == 0) throw ArgumentError("validation_brier: empty dataset");
  double s = 0.0;
  for (std::size_t i = 0; i < val.size(); ++i) {
    const double p = std::clamp(model.predict(val.bids[i], val.covariates.row(i)), 0.0, 1.0);
    const double e = double(val.outcomes[i]) - p;
    s += e * e;
  }
  return s / double(val.size());
}

}  // namespace bidbench
