#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bidbench/models/common.hpp"
#include "bidbench/models/drnet.hpp"
#include "bidbench/models/hie.hpp"
#include "bidbench/models/logistic.hpp"
#include "bidbench/models/mlp.hpp"
#include "bidbench/models/naive.hpp"
#include "bidbench/models/oracle.hpp"
#include "bidbench/models/random_forest.hpp"
#include "bidbench/models/vcnet.hpp"

namespace bidbench {

/// Per-method hyperparameter search spaces; defaults are the benchmarked
/// grids.
struct MethodGrids {
  RfGrid random_forest;
  NetGrid mlp;
  DrnetGrid drnet;
  VcnetGrid vcnet;
};

/// Uniform fitting entry point: tune on the validation split where a grid
/// exists, return the chosen model. `log`, when given, collects fit events
/// (currently stratum merges).
inline FittedModel fit_method(Method method, const PricingDataset& train,
                              const PricingDataset& validation, const MethodGrids& grids,
                              std::uint64_t seed, std::vector<std::string>* log = nullptr) {
  switch (method) {
    case Method::naive: return fit_naive(train);
    case Method::logistic: return fit_logistic(train, validation);
    case Method::random_forest:
      return fit_random_forest(train, validation, grids.random_forest, seed);
    case Method::mlp: return fit_mlp(train, validation, grids.mlp, seed);
    case Method::hie: return fit_hie(train, validation);
    case Method::drnet: return fit_drnet(train, validation, grids.drnet, seed, log);
    case Method::vcnet: return fit_vcnet(train, validation, grids.vcnet, seed);
    case Method::oracle: return fit_oracle(train);
  }
  throw ArgumentError("unknown method");
}

}  // namespace bidbench
