#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bidbench/dataset.hpp"
#include "bidbench/models/drnet.hpp"

using namespace bidbench;

namespace {

double rel_gap(double a, double b) {
  return std::abs(a - b) / std::max(1e-6, std::abs(a) + std::abs(b));
}

SplitDataset spread_bid_data(std::size_t n, std::uint64_t seed) {
  const CovariateMatrix cov = synthesize_covariates(n, 3, 1, seed);
  const BiasSpec bias = draw_bias(0.0, cov, seed + 1);
  const auto mu = [](double b, std::span<const double>) { return b < 0.4 ? 0.9 : 0.2; };
  const PricingDataset ds = generate_with_response(cov, mu, 0.05, bias, seed + 2);
  return split(ds, seed + 3);
}

}  // namespace

TEST_CASE("bids map onto equal-width strata with the top edge closed") {
  REQUIRE(stratum_index(0.0, 10) == 0);
  REQUIRE(stratum_index(0.05, 10) == 0);
  REQUIRE(stratum_index(0.1, 10) == 1);
  REQUIRE(stratum_index(0.999, 10) == 9);
  REQUIRE(stratum_index(1.0, 10) == 9);
  REQUIRE(stratum_index(0.5, 1) == 0);
  REQUIRE_THROWS_AS(stratum_index(0.5, 0), ArgumentError);
  REQUIRE_THROWS_AS(stratum_index(-0.1, 10), DomainError);
  REQUIRE_THROWS_AS(stratum_index(1.1, 10), DomainError);
}

TEST_CASE("empty strata merge leftward and leading ones join the first occupied") {
  const std::vector<double> bids{0.45, 0.48, 0.52, 0.55};  // strata 4 and 5 only
  std::vector<std::string> log;
  const auto head = detail::merge_empty_strata(bids, 10, &log);
  REQUIRE(head == std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
  REQUIRE(log.size() == 8);  // eight of ten strata were empty
  for (const auto& line : log) REQUIRE(line.find("merged") != std::string::npos);

  // Fully occupied: identity mapping, nothing logged.
  std::vector<double> dense;
  for (int k = 0; k < 10; ++k) dense.push_back(0.05 + 0.1 * k);
  std::vector<std::string> quiet;
  const auto ident = detail::merge_empty_strata(dense, 10, &quiet);
  for (std::size_t k = 0; k < 10; ++k) REQUIRE(ident[k] == k);
  REQUIRE(quiet.empty());

  REQUIRE_THROWS_AS(detail::merge_empty_strata(std::vector<double>{}, 10, nullptr),
                    DegenerateDataError);
}

TEST_CASE("a single-head model is exactly a dense network with a bid passthrough") {
  const std::size_t d = 3, w = 5;
  const DrnetModel model(d, w, 1, std::vector<std::size_t>(10, 0), 123);

  // Rebuild the same computation as one flat stack: two body layers widened
  // by a unit that carries the bid, then the three head layers.
  net::DenseNetwork flat(d + 1,
                         {{w + 1, net::Activation::relu},
                          {w + 1, net::Activation::relu},
                          {w, net::Activation::relu},
                          {w, net::Activation::relu},
                          {1, net::Activation::sigmoid}},
                         0);
  auto& fs = flat.store();
  std::fill(fs.values().begin(), fs.values().end(), 0.0);
  const auto& src = model.store();

  const auto& body = model.body().layers();
  const auto& head = model.heads()[0].layers();
  const auto& lay = flat.stack().layers();

  // Body layer 0: d -> w embedded into (d+1) -> (w+1).
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < d; ++i)
      fs.value(lay[0].weight_offset())[j * (d + 1) + i] =
          *src.value(body[0].weight_offset() + j * d + i);
    fs.value(lay[0].bias_offset())[j] = *src.value(body[0].bias_offset() + j);
  }
  fs.value(lay[0].weight_offset())[w * (d + 1) + d] = 1.0;  // bid passthrough

  // Body layer 1: w -> w embedded into (w+1) -> (w+1).
  for (std::size_t j = 0; j < w; ++j) {
    for (std::size_t i = 0; i < w; ++i)
      fs.value(lay[1].weight_offset())[j * (w + 1) + i] =
          *src.value(body[1].weight_offset() + j * w + i);
    fs.value(lay[1].bias_offset())[j] = *src.value(body[1].bias_offset() + j);
  }
  fs.value(lay[1].weight_offset())[w * (w + 1) + w] = 1.0;

  // Head layers map one-to-one: (w+1) -> w -> w -> 1.
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& h = head[l];
    const auto& f = lay[2 + l];
    for (std::size_t k = 0; k < h.in() * h.out(); ++k)
      fs.value(f.weight_offset())[k] = *src.value(h.weight_offset() + k);
    for (std::size_t k = 0; k < h.out(); ++k)
      fs.value(f.bias_offset())[k] = *src.value(h.bias_offset() + k);
  }

  Rng rng(9);
  for (int probe = 0; probe < 20; ++probe) {
    std::vector<double> x(d);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    const double b = rng.uniform(0.01, 0.99);
    std::vector<double> joined = x;
    joined.push_back(b);
    REQUIRE(std::abs(model.predict(b, x) - flat.forward(joined)[0]) < 1e-12);
  }
}

TEST_CASE("model gradients agree with finite differences across heads") {
  const std::size_t d = 2;
  DrnetModel model(d, 4, 2, std::vector<std::size_t>{0, 1}, 321);
  const std::vector<double> x{0.4, -0.8};
  const double b = 0.3;  // stratum 0 -> head 0; head 1 gets no signal
  const double y = 1.0;

  const auto loss_at = [&]() { return net::bce_term(model.predict(b, x), y); };

  net::LayerStack::Cache body_cache, head_cache;
  std::vector<double> d_head_in, d_rep;
  model.store().zero_grad();
  const double p = model.forward(b, x, body_cache, head_cache);
  model.backward(b, p - y, body_cache, head_cache, d_head_in, d_rep);
  const std::vector<double> analytic = model.store().grads();

  const double h = 1e-5;
  for (std::size_t i = 0; i < model.store().size(); ++i) {
    const double keep = model.store().values()[i];
    model.store().values()[i] = keep + h;
    const double up = loss_at();
    model.store().values()[i] = keep - h;
    const double down = loss_at();
    model.store().values()[i] = keep;
    REQUIRE(rel_gap(analytic[i], (up - down) / (2.0 * h)) < 1e-4);
  }

  // The idle head must have received no gradient at all.
  double head1_grad = 0.0;
  for (const auto& layer : model.heads()[1].layers()) {
    for (std::size_t k = 0; k < layer.in() * layer.out(); ++k)
      head1_grad += std::abs(*model.store().grad(layer.weight_offset() + k));
    for (std::size_t k = 0; k < layer.out(); ++k)
      head1_grad += std::abs(*model.store().grad(layer.bias_offset() + k));
  }
  REQUIRE(head1_grad == 0.0);
}

TEST_CASE("bids in different strata use different heads") {
  DrnetModel model(2, 4, 2, std::vector<std::size_t>{0, 0, 1, 1}, 55);
  REQUIRE(model.head_for_bid(0.1) == 0);
  REQUIRE(model.head_for_bid(0.49) == 0);
  REQUIRE(model.head_for_bid(0.51) == 1);
  REQUIRE(model.head_for_bid(1.0) == 1);
}

TEST_CASE("the full fit learns the bid cliff and records its strata") {
  const SplitDataset parts = spread_bid_data(600, 400);
  DrnetGrid grid;
  grid.strata = {4};
  grid.net.width = {8};
  grid.net.batch_size = {16};
  grid.net.steps = {300};
  grid.net.learning_rate = {0.05};

  std::vector<std::string> log;
  const FittedModel fitted = fit_drnet(parts.train, parts.validation, grid, 401, &log);
  REQUIRE(fitted.method() == Method::drnet);
  REQUIRE(fitted.supports_response());
  REQUIRE(fitted.chosen_hyperparameters().at("strata") == "4");

  double low = 0.0, high = 0.0;
  const std::size_t m = parts.test.size();
  for (std::size_t i = 0; i < m; ++i) {
    low += fitted.predict_response(0.2, parts.test.covariates.row(i));
    high += fitted.predict_response(0.8, parts.test.covariates.row(i));
  }
  REQUIRE(low / double(m) > high / double(m) + 0.3);

  // Uniform bids fill all four strata, so no merging was needed.
  const auto* model = dynamic_cast<const DrnetModel*>(fitted.impl());
  REQUIRE(model->heads().size() == 4);
  for (const std::size_t h : model->head_of_stratum()) REQUIRE(h < model->heads().size());
  REQUIRE(log.empty());
}

TEST_CASE("drnet fitting is deterministic and validates its inputs") {
  const SplitDataset parts = spread_bid_data(200, 500);
  DrnetGrid grid;
  grid.strata = {2};
  grid.net.width = {6};
  grid.net.batch_size = {16};
  grid.net.steps = {100};
  grid.net.learning_rate = {0.05};

  const FittedModel a = fit_drnet(parts.train, parts.validation, grid, 501);
  const FittedModel b = fit_drnet(parts.train, parts.validation, grid, 501);
  const FittedModel c = fit_drnet(parts.train, parts.validation, grid, 502);
  const auto x = parts.test.covariates.row(0);
  REQUIRE(a.predict_response(0.35, x) == b.predict_response(0.35, x));
  REQUIRE(a.predict_response(0.35, x) != c.predict_response(0.35, x));

  DrnetGrid bad = grid;
  bad.strata = {};
  REQUIRE_THROWS_AS(fit_drnet(parts.train, parts.validation, bad, 1), ArgumentError);
  bad = grid;
  bad.net.batch_size = {100000};
  REQUIRE_THROWS_AS(fit_drnet(parts.train, parts.validation, bad, 1), ArgumentError);
  REQUIRE_THROWS_AS(fit_drnet(PricingDataset{}, parts.validation, grid, 1), ArgumentError);
  REQUIRE_THROWS_AS(fit_drnet(parts.train, PricingDataset{}, grid, 1), ArgumentError);
}
