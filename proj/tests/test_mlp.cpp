#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "bidbench/dataset.hpp"
#include "bidbench/models/mlp.hpp"

using namespace bidbench;

namespace {

/// Acceptances determined by the bid alone: accept exactly below 0.5.
SplitDataset bid_threshold_data(std::size_t n, std::uint64_t seed) {
  const CovariateMatrix cov = synthesize_covariates(n, 3, 1, seed);
  const BiasSpec bias = draw_bias(0.0, cov, seed + 1);
  const auto mu = [](double b, std::span<const double>) { return b < 0.5 ? 1.0 : 0.0; };
  const PricingDataset ds = generate_with_response(cov, mu, 0.0, bias, seed + 2);
  return split(ds, seed + 3);
}

NetGrid tiny_grid() {
  NetGrid grid;
  grid.width = {8};
  grid.batch_size = {16};
  grid.steps = {300};
  grid.learning_rate = {0.05};
  return grid;
}

}  // namespace

TEST_CASE("the network model is the network applied to the joined input") {
  net::DenseNetwork network(4, {{6, net::Activation::relu}, {1, net::Activation::sigmoid}}, 3);
  const MlpModel model(network);
  const std::vector<double> x{0.1, -0.5, 0.3};
  const std::vector<double> joined{0.1, -0.5, 0.3, 0.77};
  REQUIRE(model.predict(0.77, x) == network.forward(joined)[0]);
}

TEST_CASE("the network learns a pure bid threshold") {
  const SplitDataset parts = bid_threshold_data(600, 40);
  const FittedModel fitted = fit_mlp(parts.train, parts.validation, tiny_grid(), 41);
  REQUIRE(fitted.method() == Method::mlp);
  REQUIRE(fitted.supports_response());

  double low = 0.0, high = 0.0;
  const std::size_t m = parts.test.size();
  for (std::size_t i = 0; i < m; ++i) {
    low += fitted.predict_response(0.2, parts.test.covariates.row(i));
    high += fitted.predict_response(0.8, parts.test.covariates.row(i));
  }
  low /= double(m);
  high /= double(m);
  REQUIRE(low > high + 0.3);
  REQUIRE(low > 0.6);
  REQUIRE(high < 0.4);
}

TEST_CASE("predictions stay inside the unit interval") {
  const SplitDataset parts = bid_threshold_data(200, 50);
  const FittedModel fitted = fit_mlp(parts.train, parts.validation, tiny_grid(), 51);
  for (std::size_t i = 0; i < parts.test.size(); ++i) {
    for (double b : {0.0, 0.31, 1.0}) {
      const double p = fitted.predict_response(b, parts.test.covariates.row(i));
      REQUIRE(p >= 0.0);
      REQUIRE(p <= 1.0);
    }
  }
}

TEST_CASE("the chosen hyperparameters are recorded") {
  const SplitDataset parts = bid_threshold_data(200, 60);
  const FittedModel fitted = fit_mlp(parts.train, parts.validation, tiny_grid(), 61);
  const auto hp = fitted.chosen_hyperparameters();
  REQUIRE(hp.at("width") == "8");
  REQUIRE(hp.at("batch_size") == "16");
  REQUIRE(hp.at("steps") == "300");
  REQUIRE(hp.at("learning_rate") == "0.050000000000000003");
}

TEST_CASE("fitting is deterministic in the seed") {
  const SplitDataset parts = bid_threshold_data(200, 70);
  const FittedModel a = fit_mlp(parts.train, parts.validation, tiny_grid(), 71);
  const FittedModel b = fit_mlp(parts.train, parts.validation, tiny_grid(), 71);
  const FittedModel c = fit_mlp(parts.train, parts.validation, tiny_grid(), 72);
  const auto x = parts.test.covariates.row(0);
  REQUIRE(a.predict_response(0.4, x) == b.predict_response(0.4, x));
  REQUIRE(a.predict_response(0.4, x) != c.predict_response(0.4, x));
}

TEST_CASE("impossible grids and empty partitions are rejected") {
  const SplitDataset parts = bid_threshold_data(100, 80);
  NetGrid grid = tiny_grid();
  grid.batch_size = {1024};  // larger than the training partition
  REQUIRE_THROWS_AS(fit_mlp(parts.train, parts.validation, grid, 81), ArgumentError);
  grid = tiny_grid();
  grid.width = {};
  REQUIRE_THROWS_AS(fit_mlp(parts.train, parts.validation, grid, 81), ArgumentError);
  REQUIRE_THROWS_AS(fit_mlp(PricingDataset{}, parts.validation, tiny_grid(), 81),
                    ArgumentError);
  REQUIRE_THROWS_AS(fit_mlp(parts.train, PricingDataset{}, tiny_grid(), 81), ArgumentError);
}
