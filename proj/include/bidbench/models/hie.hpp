#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "bidbench/linalg.hpp"
#include "bidbench/models/common.hpp"
#include "bidbench/models/logistic.hpp"

namespace bidbench {

/// Stage one of the imputation estimator: the bid-assignment model b | x,
/// a linear regression with Normal residuals. Its density at the factual or
/// counterfactual bid is the generalized propensity score.
struct GpsModel {
  std::vector<double> coefficients;  // [intercept, slopes...]
  double residual_sd = 1.0;

  double mean_at(std::span<const double> x) const {
    double m = coefficients[0];
    for (std::size_t j = 0; j < x.size(); ++j) m += coefficients[1 + j] * x[j];
    return m;
  }
};

inline GpsModel fit_gps(const PricingDataset& train) {
  const std::size_t n = train.size();
  const std::size_t d = train.covariates.cols;
  const std::size_t p = d + 1;
  if (n <= p) throw DegenerateDataError("fit_gps: fewer rows than regression parameters");

  std::vector<double> xtx(p * p, 0.0), xtb(p, 0.0), row(p);
  for (std::size_t i = 0; i < n; ++i) {
    row[0] = 1.0;
    const auto x = train.covariates.row(i);
    for (std::size_t j = 0; j < d; ++j) row[1 + j] = x[j];
    for (std::size_t j = 0; j < p; ++j) {
      xtb[j] += row[j] * train.bids[i];
      for (std::size_t k = j; k < p; ++k) xtx[j * p + k] += row[j] * row[k];
    }
  }
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < j; ++k) xtx[j * p + k] = xtx[k * p + j];

  GpsModel gps;
  gps.coefficients = solve_spd(xtx, xtb, p);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = train.bids[i] - gps.mean_at(train.covariates.row(i));
    ssr += r * r;
  }
  gps.residual_sd = std::sqrt(ssr / double(n));
  if (!(gps.residual_sd > 1e-12))
    throw DegenerateDataError("zero residual variance in the bid-assignment regression");
  return gps;
}

/// Normal density of bid b under the stage-one model, given x.
inline double gps_density(const GpsModel& gps, double b, std::span<const double> x) {
  static constexpr double kInvSqrt2Pi = 0.39894228040143268;
  const double z = (b - gps.mean_at(x)) / gps.residual_sd;
  return kInvSqrt2Pi / gps.residual_sd * std::exp(-0.5 * z * z);
}

/// Second-order polynomial features of (bid, propensity score); the stage-two
/// logistic regression adds its own intercept.
inline std::array<double, 5> hie_features(double b, double r) {
  return {b, b * b, r, r * r, b * r};
}

/// Two-stage imputation model: predictions recompute the propensity score at
/// the counterfactual bid, then evaluate the stage-two logistic model --
/// an individual-level response, not the population-averaged dose response.
class HieModel final : public ResponseModel {
 public:
  HieModel(GpsModel gps, std::vector<double> coef)
      : gps_(std::move(gps)), coef_(std::move(coef)) {}

  double predict(double b, std::span<const double> x) const override {
    const double r = gps_density(gps_, b, x);
    const auto f = hie_features(b, r);
    double z = coef_[0];
    for (std::size_t j = 0; j < f.size(); ++j) z += coef_[1 + j] * f[j];
    return net::sigmoid(z);
  }

  const GpsModel& gps() const { return gps_; }
  const std::vector<double>& coefficients() const { return coef_; }

 private:
  GpsModel gps_;
  std::vector<double> coef_;
};

inline FittedModel fit_hie(const PricingDataset& train,
                           const PricingDataset& /*validation: no grid to tune*/) {
  if (train.size() == 0) throw ArgumentError("fit_hie: empty training set");
  require_both_classes(train);
  GpsModel gps = fit_gps(train);

  const std::size_t n = train.size();
  const std::size_t p = 6;
  std::vector<double> design(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = gps_density(gps, train.bids[i], train.covariates.row(i));
    const auto f = hie_features(train.bids[i], r);
    double* row = design.data() + i * p;
    row[0] = 1.0;
    for (std::size_t j = 0; j < f.size(); ++j) row[1 + j] = f[j];
  }
  auto coef = fit_logistic_irls(design, train.outcomes, n, p, 1e-6);
  const auto [lo, hi] = bid_range(train);
  return FittedModel(Method::hie,
                     std::make_shared<HieModel>(std::move(gps), std::move(coef)), {},
                     train.covariates.cols, lo, hi);
}

}  // namespace bidbench
