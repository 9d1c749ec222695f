#pragma once

#include "bidbench/models/common.hpp"

namespace bidbench {

/// The incumbent policy: propose exactly the factual bid of each row. It
/// carries no response surface, so every response-based metric reports it as
/// not applicable; only the policy error is defined for it.
inline FittedModel fit_naive(const PricingDataset& train) {
  const auto [lo, hi] = bid_range(train);
  return FittedModel(Method::naive, nullptr, {}, train.covariates.cols, lo, hi);
}

}  // namespace bidbench
