#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bidbench/dataset.hpp"
#include "bidbench/models/logistic.hpp"

using namespace bidbench;

namespace {

PricingDataset uniform_bid_dataset(std::size_t n, double noise_sd, std::uint64_t seed) {
  const CovariateMatrix cov = synthesize_covariates(n, 4, 1, seed);
  const auto truth = draw_ground_truth(CurveFamily::richards, cov, noise_sd, seed + 1);
  const auto bias = draw_bias(0.0, cov, seed + 2);
  return generate_dataset(cov, truth, bias, seed + 3);
}

}  // namespace

TEST_CASE("logistic fit recovers the base rate on unconfounded data") {
  const PricingDataset ds = uniform_bid_dataset(4000, 0.1, 10);
  const FittedModel fitted = fit_logistic(ds, ds);
  REQUIRE(fitted.method() == Method::logistic);
  REQUIRE(fitted.supports_response());

  double pred_rate = 0.0, emp_rate = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    pred_rate += fitted.predict_response(ds.bids[i], ds.covariates.row(i));
    emp_rate += ds.outcomes[i];
  }
  pred_rate /= double(ds.size());
  emp_rate /= double(ds.size());
  REQUIRE(std::abs(pred_rate - emp_rate) < 0.02);
}

TEST_CASE("a decreasing response surface yields a negative bid coefficient") {
  const PricingDataset ds = uniform_bid_dataset(4000, 0.1, 21);
  const FittedModel fitted = fit_logistic(ds, ds);
  const auto* model = dynamic_cast<const LogisticModel*>(fitted.impl());
  REQUIRE(model != nullptr);
  REQUIRE(model->coefficients().size() == ds.covariates.cols + 2);
  REQUIRE(model->coefficients().back() < 0.0);
  // The prediction itself should fall with the bid at a fixed row.
  const auto x = ds.covariates.row(0);
  REQUIRE(fitted.predict_response(0.9, x) < fitted.predict_response(0.1, x));
}

TEST_CASE("the solver reaches at least the quality of a long gradient descent") {
  // Tiny hand dataset: p = 3 with intercept, one feature, one bid column.
  const std::vector<double> design{1, 0.5, 0.2,  1, -1.0, 0.8, 1, 1.5, 0.5,
                                   1, 0.3, 0.9,  1, -0.7, 0.1, 1, 0.9, 0.6};
  const std::vector<int> y{1, 0, 1, 0, 1, 1};
  const std::size_t n = 6, p = 3;
  const double ridge = 1e-6;
  const auto beta = fit_logistic_irls(design, y, n, p, ridge);

  const auto objective = [&](const std::vector<double>& b) {
    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double z = 0.0;
      for (std::size_t j = 0; j < p; ++j) z += design[i * p + j] * b[j];
      obj += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y[i] * z;
    }
    for (const double bj : b) obj += 0.5 * ridge * bj * bj;
    return obj;
  };

  // Reference: plain gradient descent from zero, many small steps.
  std::vector<double> ref(p, 0.0);
  for (int step = 0; step < 5000; ++step) {
    std::vector<double> grad(p, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double z = 0.0;
      for (std::size_t j = 0; j < p; ++j) z += design[i * p + j] * ref[j];
      const double r = net::sigmoid(z) - y[i];
      for (std::size_t j = 0; j < p; ++j) grad[j] += design[i * p + j] * r;
    }
    for (std::size_t j = 0; j < p; ++j) ref[j] -= 0.1 * (grad[j] + ridge * ref[j]);
  }
  REQUIRE(objective(beta) <= objective(ref) + 1e-8);
}

TEST_CASE("separable data stays finite under the ridge penalty") {
  // One feature separates the classes perfectly.
  const std::size_t n = 40;
  std::vector<double> design(n * 3);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (double(i) / (n - 1)) * 2.0 - 1.0;
    design[i * 3 + 0] = 1.0;
    design[i * 3 + 1] = x;
    design[i * 3 + 2] = 0.5;
    y[i] = x > 0.0 ? 1 : 0;
  }
  const auto beta = fit_logistic_irls(design, y, n, 3, 1e-6);
  for (const double b : beta) REQUIRE(std::isfinite(b));
  REQUIRE(beta[1] > 1.0);  // strongly positive, but not runaway
}

TEST_CASE("degenerate training sets are rejected") {
  PricingDataset ds = uniform_bid_dataset(50, 0.1, 33);
  std::fill(ds.outcomes.begin(), ds.outcomes.end(), 1);
  REQUIRE_THROWS_AS(fit_logistic(ds, ds), DegenerateDataError);
  std::fill(ds.outcomes.begin(), ds.outcomes.end(), 0);
  REQUIRE_THROWS_AS(fit_logistic(ds, ds), DegenerateDataError);
  REQUIRE_THROWS_AS(fit_logistic(PricingDataset{}, ds), ArgumentError);
  REQUIRE_THROWS_AS(fit_logistic_irls(std::vector<double>{1.0}, std::vector<int>{1, 0}, 2, 3,
                                      1e-6),
                    ArgumentError);
}

TEST_CASE("fitting is deterministic") {
  const PricingDataset ds = uniform_bid_dataset(300, 0.1, 44);
  const FittedModel a = fit_logistic(ds, ds);
  const FittedModel b = fit_logistic(ds, ds);
  const auto* ma = dynamic_cast<const LogisticModel*>(a.impl());
  const auto* mb = dynamic_cast<const LogisticModel*>(b.impl());
  REQUIRE(ma->coefficients() == mb->coefficients());
  REQUIRE(a.train_bid_min() == b.train_bid_min());
  REQUIRE(a.train_bid_max() == b.train_bid_max());
}
