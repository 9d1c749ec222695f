#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "bidbench/dataset.hpp"

using namespace bidbench;

namespace {

std::string temp_path(const std::string& name) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "bidbench_dataset_tests";
  fs::create_directories(dir);
  return (dir / name).string();
}

PricingDataset small_dataset(std::uint64_t seed) {
  const CovariateMatrix cov = synthesize_covariates(80, 5, 2, seed);
  const auto truth = draw_ground_truth(CurveFamily::richards, cov, 0.1, seed + 1);
  const auto bias = draw_bias(5.0, cov, seed + 2);
  return generate_dataset(cov, truth, bias, seed + 3);
}

}  // namespace

TEST_CASE("generation is deterministic in the seed") {
  const PricingDataset a = small_dataset(100);
  const PricingDataset b = small_dataset(100);
  REQUIRE(a.bids == b.bids);
  REQUIRE(a.accept_probs == b.accept_probs);
  REQUIRE(a.outcomes == b.outcomes);
  REQUIRE(a.truth.has_value());
  REQUIRE(a.bias.has_value());
  const PricingDataset c = small_dataset(101);
  REQUIRE(a.bids != c.bids);
}

TEST_CASE("a sure-accept response makes every outcome one") {
  const CovariateMatrix cov = synthesize_covariates(50, 3, 1, 4);
  const BiasSpec bias = draw_bias(0.0, cov, 5);
  const auto always = [](double, std::span<const double>) { return 1.0; };
  const PricingDataset ds = generate_with_response(cov, always, 0.0, bias, 6);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    REQUIRE(ds.accept_probs[i] == 1.0);
    REQUIRE(ds.outcomes[i] == 1);
  }
}

TEST_CASE("outcomes are Bernoulli draws from the acceptance probability") {
  const CovariateMatrix cov = synthesize_covariates(100000, 3, 1, 7);
  const BiasSpec bias = draw_bias(0.0, cov, 8);
  const auto half = [](double, std::span<const double>) { return 0.5; };
  const PricingDataset ds = generate_with_response(cov, half, 0.0, bias, 9);
  double rate = 0.0;
  for (const int y : ds.outcomes) rate += y;
  rate /= double(ds.size());
  REQUIRE(std::abs(rate - 0.5) < 0.005);
}

TEST_CASE("observation noise perturbs but clamps the stored probability") {
  const CovariateMatrix cov = synthesize_covariates(2000, 3, 1, 11);
  const BiasSpec bias = draw_bias(0.0, cov, 12);
  const auto half = [](double, std::span<const double>) { return 0.5; };
  const PricingDataset ds = generate_with_response(cov, half, 0.1, bias, 13);
  bool saw_off_center = false;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    REQUIRE(ds.accept_probs[i] >= 0.0);
    REQUIRE(ds.accept_probs[i] <= 1.0);
    if (std::abs(ds.accept_probs[i] - 0.5) > 0.01) saw_off_center = true;
  }
  REQUIRE(saw_off_center);
}

TEST_CASE("generation validates its inputs") {
  const CovariateMatrix cov = synthesize_covariates(20, 3, 1, 1);
  const BiasSpec bias = draw_bias(0.0, cov, 2);
  const auto mu = [](double, std::span<const double>) { return 0.5; };
  REQUIRE_THROWS_AS(generate_with_response(CovariateMatrix{}, mu, 0.1, bias, 3), ArgumentError);
  REQUIRE_THROWS_AS(generate_with_response(cov, mu, -0.1, bias, 3), ArgumentError);
  BiasSpec wrong = bias;
  wrong.w5.push_back(0.5);
  REQUIRE_THROWS_AS(generate_with_response(cov, mu, 0.1, wrong, 3), ArgumentError);
  const CovariateMatrix other = synthesize_covariates(20, 4, 1, 1);
  const auto truth = draw_ground_truth(CurveFamily::richards, other, 0.1, 2);
  REQUIRE_THROWS_AS(generate_dataset(cov, truth, bias, 3), ArgumentError);
}

TEST_CASE("split partitions rows 70/10/20 and preserves them") {
  const PricingDataset ds = small_dataset(55);
  const SplitDataset parts = split(ds, 77);
  REQUIRE(parts.train.size() == 56);
  REQUIRE(parts.validation.size() == 8);
  REQUIRE(parts.test.size() == 16);

  // Same seed, same partition; the union holds every original bid exactly once.
  const SplitDataset again = split(ds, 77);
  REQUIRE(parts.train.bids == again.train.bids);
  REQUIRE(parts.test.bids == again.test.bids);

  std::multiset<double> original(ds.bids.begin(), ds.bids.end());
  std::multiset<double> pieces;
  for (const auto* part : {&parts.train, &parts.validation, &parts.test})
    pieces.insert(part->bids.begin(), part->bids.end());
  REQUIRE(pieces == original);

  // Rows keep covariates, probability, and outcome together.
  const auto x0 = parts.train.covariates.row(0);
  bool found = false;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto xi = ds.covariates.row(i);
    if (std::equal(x0.begin(), x0.end(), xi.begin(), xi.end())) {
      REQUIRE(ds.bids[i] == parts.train.bids[0]);
      REQUIRE(ds.accept_probs[i] == parts.train.accept_probs[0]);
      REQUIRE(ds.outcomes[i] == parts.train.outcomes[0]);
      found = true;
      break;
    }
  }
  REQUIRE(found);

  REQUIRE(parts.train.truth.has_value());
  REQUIRE(parts.test.truth.has_value());

  PricingDataset tiny = ds;
  tiny.bids.resize(9);
  REQUIRE_THROWS_AS(split(tiny, 1), ArgumentError);
}

TEST_CASE("ten rows split into seven, one, and two") {
  PricingDataset ds = small_dataset(3);
  const std::size_t d = ds.covariates.cols;
  ds.bids.resize(10);
  ds.accept_probs.resize(10);
  ds.outcomes.resize(10);
  ds.covariates.rows = 10;
  ds.covariates.values.resize(10 * d);
  const SplitDataset parts = split(ds, 5);
  REQUIRE(parts.train.size() == 7);
  REQUIRE(parts.validation.size() == 1);
  REQUIRE(parts.test.size() == 2);
}

TEST_CASE("export and import round trip byte-identically") {
  const PricingDataset ds = small_dataset(200);
  const std::string path_a = temp_path("ds_a.csv");
  const std::string path_b = temp_path("ds_b.csv");
  export_csv(ds, path_a);

  const PricingDataset back = import_csv(path_a);
  REQUIRE(back.size() == ds.size());
  REQUIRE(back.covariates.cols == ds.covariates.cols);
  REQUIRE(back.bids == ds.bids);
  REQUIRE(back.accept_probs == ds.accept_probs);
  REQUIRE(back.outcomes == ds.outcomes);
  REQUIRE(back.covariates.values == ds.covariates.values);
  REQUIRE_FALSE(back.truth.has_value());  // the CSV carries data, not the generator

  export_csv(back, path_b);
  REQUIRE(read_text_file(path_a) == read_text_file(path_b));
}

TEST_CASE("import rejects malformed datasets") {
  const std::string path = temp_path("malformed.csv");
  write_text_file(path, "x_0,bid,p_factual,y\n0.1,1.5,0.5,1\n");
  REQUIRE_THROWS_AS(import_csv(path), IngestionError);  // bid outside [0,1]
  write_text_file(path, "x_0,bid,p_factual,y\n0.1,0.5,0.5,2\n");
  REQUIRE_THROWS_AS(import_csv(path), IngestionError);  // outcome not binary
  write_text_file(path, "x_0,bid,p_factual\n0.1,0.5,0.5\n");
  REQUIRE_THROWS_AS(import_csv(path), IngestionError);  // missing y column
  write_text_file(path, "bid,p_factual,y\n0.5,0.5,1\n");
  REQUIRE_THROWS_AS(import_csv(path), IngestionError);  // no covariates
}
