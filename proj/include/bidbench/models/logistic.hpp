#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <vector>

#include "bidbench/linalg.hpp"
#include "bidbench/models/common.hpp"
#include "bidbench/net.hpp"

namespace bidbench {

namespace detail {
/// log(1 + e^z), overflow-safe.
inline double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }
}  // namespace detail

/// Ridge-penalized logistic regression by damped IRLS. `design` is row-major
/// n x p and must already contain the intercept column. Newton steps use the
/// (XtWX + ridge*I) normal equations; a step is halved until the penalized
/// deviance stops increasing, which keeps the solver monotone even on
/// separable data where the unpenalized optimum is at infinity.
inline std::vector<double> fit_logistic_irls(const std::vector<double>& design,
                                             std::span<const int> y, std::size_t n,
                                             std::size_t p, double ridge) {
  if (design.size() != n * p || y.size() != n)
    throw ArgumentError("fit_logistic_irls: dimension mismatch");

  std::vector<double> beta(p, 0.0);
  std::vector<double> prob(n), grad(p), hess(p * p), step(p), trial(p);

  const auto objective = [&](const std::vector<double>& b) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = design.data() + i * p;
      double z = 0.0;
      for (std::size_t j = 0; j < p; ++j) z += row[j] * b[j];
      obj += detail::softplus(z) - double(y[i]) * z;
    }
    for (const double bj : b) obj += 0.5 * ridge * bj * bj;
    return obj;
  };

  double obj = objective(beta);
  for (int iter = 0; iter < 100; ++iter) {
    std::fill(grad.begin(), grad.end(), 0.0);
    std::fill(hess.begin(), hess.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = design.data() + i * p;
      double z = 0.0;
      for (std::size_t j = 0; j < p; ++j) z += row[j] * beta[j];
      const double pi = net::sigmoid(z);
      prob[i] = pi;
      const double r = pi - double(y[i]);
      const double w = std::max(pi * (1.0 - pi), 1e-10);
      for (std::size_t j = 0; j < p; ++j) {
        grad[j] += row[j] * r;
        for (std::size_t k = j; k < p; ++k) hess[j * p + k] += w * row[j] * row[k];
      }
    }
    double gmax = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      grad[j] += ridge * beta[j];
      hess[j * p + j] += ridge;
      gmax = std::max(gmax, std::abs(grad[j]));
    }
    if (gmax < 1e-10) break;
    for (std::size_t j = 0; j < p; ++j)
      for (std::size_t k = 0; k < j; ++k) hess[j * p + k] = hess[k * p + j];

    step = solve_spd(hess, grad, p);
    bool accepted = false;
    double scale = 1.0;
    for (int halving = 0; halving < 40; ++halving, scale *= 0.5) {
      for (std::size_t j = 0; j < p; ++j) trial[j] = beta[j] - scale * step[j];
      const double trial_obj = objective(trial);
      if (trial_obj <= obj + 1e-12) {
        beta = trial;
        obj = trial_obj;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // no descent direction left: converged
  }

  for (const double b : beta)
    if (!std::isfinite(b)) throw DegenerateDataError("logistic coefficients diverged");
  return beta;
}

/// Logistic response surface on the concatenated input [x, b]:
/// coef = [intercept, x_0..x_{d-1}, b].
class LogisticModel final : public ResponseModel {
 public:
  explicit LogisticModel(std::vector<double> coef) : coef_(std::move(coef)) {}

  double predict(double b, std::span<const double> x) const override {
    double z = coef_[0];
    for (std::size_t j = 0; j < x.size(); ++j) z += coef_[1 + j] * x[j];
    z += coef_.back() * b;
    return net::sigmoid(z);
  }

  const std::vector<double>& coefficients() const { return coef_; }

 private:
  std::vector<double> coef_;
};

inline void require_both_classes(const PricingDataset& train) {
  bool any0 = false, any1 = false;
  for (const int y : train.outcomes) (y ? any1 : any0) = true;
  if (!any0 || !any1)
    throw DegenerateDataError("training outcomes are single-class; logistic fit undefined");
}

inline FittedModel fit_logistic(const PricingDataset& train,
                                const PricingDataset& /*validation: no grid to tune*/) {
  if (train.size() == 0) throw ArgumentError("fit_logistic: empty training set");
  require_both_classes(train);

  const std::size_t n = train.size();
  const std::size_t d = train.covariates.cols;
  const std::size_t p = d + 2;
  std::vector<double> design(n * p);
  for (std::size_t i = 0; i < n; ++i) {
    double* row = design.data() + i * p;
    row[0] = 1.0;
    const auto x = train.covariates.row(i);
    for (std::size_t j = 0; j < d; ++j) row[1 + j] = x[j];
    row[p - 1] = train.bids[i];
  }
  auto beta = fit_logistic_irls(design, train.outcomes, n, p, 1e-6);
  const auto [lo, hi] = bid_range(train);
  return FittedModel(Method::logistic, std::make_shared<LogisticModel>(std::move(beta)), {}, d,
                     lo, hi);
}

}  // namespace bidbench
