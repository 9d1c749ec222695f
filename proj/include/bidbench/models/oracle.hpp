#pragma once

#include "bidbench/ground_truth.hpp"
#include "bidbench/models/common.hpp"

namespace bidbench {

/// The noiseless generator wrapped behind the model contract. Diagnostic
/// only: it anchors the metric tests (zero MISE/PE, minimal Brier) and can be
/// injected into sweeps as a sanity probe.
class OracleModel final : public ResponseModel {
 public:
  explicit OracleModel(GroundTruthSpec truth) : truth_(std::move(truth)) {}

  double predict(double b, std::span<const double> x) const override {
    return true_response(truth_, b, x);
  }

  const GroundTruthSpec& truth() const { return truth_; }

 private:
  GroundTruthSpec truth_;
};

inline FittedModel fit_oracle(const PricingDataset& train) {
  if (!train.truth)
    throw ArgumentError("oracle requires a dataset that carries its generating ground truth");
  const auto [lo, hi] = bid_range(train);
  return FittedModel(Method::oracle, std::make_shared<OracleModel>(*train.truth), {},
                     train.covariates.cols, lo, hi);
}

}  // namespace bidbench
