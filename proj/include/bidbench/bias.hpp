#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "bidbench/covariates.hpp"
#include "bidbench/errors.hpp"
#include "bidbench/ground_truth.hpp"
#include "bidbench/rng.hpp"

namespace bidbench {

/// Selection-bias policy for factual bids: the bid of a row is drawn from
/// Beta(theta + 1, theta/phi(x) + 1 - theta), whose mode is the row's modal
/// bid phi(x) and whose concentration grows with theta. theta = 0 degrades to
/// Uniform(0,1) -- no bias -- for every phi.
struct BiasSpec {
  double theta = 0.0;
  std::vector<double> w5;  // entries in [0,1]
  ScoreBounds phi_bounds;

  /// phi(x) in (0,1): normalized w5-score squeezed away from both endpoints
  /// so the Beta's second shape parameter stays positive.
  double modal_bid(std::span<const double> x) const {
    if (x.size() != w5.size()) throw ArgumentError("covariate row has wrong dimension");
    double raw = 0.0;
    for (std::size_t k = 0; k < w5.size(); ++k) raw += w5[k] * x[k];
    const double s = std::clamp((raw - phi_bounds.lo) / (phi_bounds.hi - phi_bounds.lo), 0.0, 1.0);
    return 0.01 + 0.98 * s;
  }
};

inline BiasSpec draw_bias(double theta, const CovariateMatrix& cov, std::uint64_t seed) {
  if (!(theta >= 0.0)) throw ArgumentError("draw_bias: theta must be >= 0");
  if (cov.rows == 0 || cov.cols == 0) throw ArgumentError("draw_bias: empty matrix");

  BiasSpec bias;
  bias.theta = theta;
  Rng stream = Rng(seed).fork("w5");
  bias.w5.resize(cov.cols);
  for (double& e : bias.w5) e = stream.uniform();

  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < cov.rows; ++i) {
    double raw = 0.0;
    const auto x = cov.row(i);
    for (std::size_t k = 0; k < cov.cols; ++k) raw += bias.w5[k] * x[k];
    if (i == 0) {
      lo = hi = raw;
    } else {
      lo = std::min(lo, raw);
      hi = std::max(hi, raw);
    }
  }
  if (hi <= lo) {
    lo -= 0.5;
    hi = lo + 1.0;
  }
  bias.phi_bounds = {lo, hi};
  return bias;
}

/// One factual bid for the row, strictly inside (0,1).
inline double sample_bid(const BiasSpec& bias, std::span<const double> x, Rng& rng) {
  const double phi = bias.modal_bid(x);
  const double a = bias.theta + 1.0;
  const double b = bias.theta / phi + 1.0 - bias.theta;
  if (!(b > 0.0))
    throw Error("internal: Beta second shape parameter " + std::to_string(b) +
                " non-positive despite phi in (0,1)");
  const double draw = rng.beta(a, b);
  return std::clamp(draw, 1e-9, 1.0 - 1e-9);
}

}  // namespace bidbench
