#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bidbench/bias.hpp"
#include "bidbench/covariates.hpp"
#include "bidbench/csv.hpp"
#include "bidbench/errors.hpp"
#include "bidbench/format.hpp"
#include "bidbench/ground_truth.hpp"
#include "bidbench/rng.hpp"

namespace bidbench {

/// One observational pricing sample per row: covariates, the factual bid b_f,
/// the noisy factual acceptance probability p_f, and the Bernoulli outcome
/// y_f. For synthetic data the noiseless generator is carried along so that
/// counterfactual metrics can query it later.
struct PricingDataset {
  CovariateMatrix covariates;
  std::vector<double> bids;
  std::vector<double> accept_probs;
  std::vector<int> outcomes;
  std::optional<GroundTruthSpec> truth;
  std::optional<BiasSpec> bias;
  std::uint64_t seed = 0;

  std::size_t size() const { return bids.size(); }
};

/// mu(b, x) as a plain callable; lets metrics and tests swap in analytic
/// response functions where a drawn spec would get in the way.
using ResponseFn = std::function<double(double, std::span<const double>)>;

inline ResponseFn response_fn(const GroundTruthSpec& spec) {
  return [spec](double b, std::span<const double> x) { return true_response(spec, b, x); };
}

/// Core sampling loop, generic in the response function. Each row owns a
/// forked substream, so the dataset is independent of evaluation order.
inline PricingDataset generate_with_response(const CovariateMatrix& cov, const ResponseFn& mu,
                                             double noise_sd, const BiasSpec& bias,
                                             std::uint64_t seed) {
  if (cov.rows == 0) throw ArgumentError("generate: empty covariate matrix");
  if (bias.w5.size() != cov.cols)
    throw ArgumentError("generate: bias spec drawn on a different matrix shape");
  if (noise_sd < 0.0) throw ArgumentError("generate: negative noise_sd");

  PricingDataset ds;
  ds.covariates = cov;
  ds.seed = seed;
  ds.bias = bias;
  ds.bids.resize(cov.rows);
  ds.accept_probs.resize(cov.rows);
  ds.outcomes.resize(cov.rows);

  const Rng root(seed);
  for (std::size_t i = 0; i < cov.rows; ++i) {
    Rng row = root.fork(i);
    const auto x = cov.row(i);
    const double b = sample_bid(bias, x, row);
    const double p = std::clamp(mu(b, x) + row.normal(0.0, noise_sd), 0.0, 1.0);
    ds.bids[i] = b;
    ds.accept_probs[i] = p;
    ds.outcomes[i] = row.uniform() < p ? 1 : 0;
  }
  return ds;
}

inline PricingDataset generate_dataset(const CovariateMatrix& cov, const GroundTruthSpec& truth,
                                       const BiasSpec& bias, std::uint64_t seed) {
  if (truth.dim() != cov.cols)
    throw ArgumentError("generate: ground truth drawn on a different matrix shape");
  PricingDataset ds =
      generate_with_response(cov, response_fn(truth), truth.noise_sd, bias, seed);
  ds.truth = truth;
  return ds;
}

/// 70 / 10 / 20 partition after a seeded permutation.
struct SplitDataset {
  PricingDataset train, validation, test;
};

namespace detail {
inline PricingDataset take_rows(const PricingDataset& ds, std::span<const std::size_t> idx) {
  PricingDataset out;
  out.covariates.rows = idx.size();
  out.covariates.cols = ds.covariates.cols;
  out.covariates.column_kinds = ds.covariates.column_kinds;
  out.covariates.values.reserve(idx.size() * ds.covariates.cols);
  out.bids.reserve(idx.size());
  out.accept_probs.reserve(idx.size());
  out.outcomes.reserve(idx.size());
  for (const std::size_t i : idx) {
    const auto x = ds.covariates.row(i);
    out.covariates.values.insert(out.covariates.values.end(), x.begin(), x.end());
    out.bids.push_back(ds.bids[i]);
    out.accept_probs.push_back(ds.accept_probs[i]);
    out.outcomes.push_back(ds.outcomes[i]);
  }
  out.truth = ds.truth;
  out.bias = ds.bias;
  out.seed = ds.seed;
  return out;
}
}  // namespace detail

inline SplitDataset split(const PricingDataset& ds, std::uint64_t seed) {
  const std::size_t n = ds.size();
  if (n < 10) throw ArgumentError("split: need at least 10 rows");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm);

  const std::size_t n_train = (n * 7) / 10;
  const std::size_t n_val = n / 10;
  const std::span<const std::size_t> all(perm);
  SplitDataset parts;
  parts.train = detail::take_rows(ds, all.subspan(0, n_train));
  parts.validation = detail::take_rows(ds, all.subspan(n_train, n_val));
  parts.test = detail::take_rows(ds, all.subspan(n_train + n_val));
  return parts;
}

/// Columns: x_0..x_{d-1}, bid, p_factual, y. Doubles rendered round-trip
/// exactly, so export/import and byte-level determinism checks are loss-free.
inline void export_csv(const PricingDataset& ds, const std::string& path) {
  const std::size_t d = ds.covariates.cols;
  std::vector<std::string> columns;
  for (std::size_t j = 0; j < d; ++j) columns.push_back("x_" + std::to_string(j));
  columns.insert(columns.end(), {"bid", "p_factual", "y"});

  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    std::vector<std::string> r;
    r.reserve(d + 3);
    for (const double v : ds.covariates.row(i)) r.push_back(fmt_g17(v));
    r.push_back(fmt_g17(ds.bids[i]));
    r.push_back(fmt_g17(ds.accept_probs[i]));
    r.push_back(std::to_string(ds.outcomes[i]));
    rows.push_back(std::move(r));
  }
  write_text_file(path, render_csv(columns, rows));
}

/// Inverse of export_csv. Covariates are taken as-is (they were standardized
/// at generation time); the generator spec is not part of the CSV.
inline PricingDataset import_csv(const std::string& path) {
  const NumericCsv csv = read_numeric_csv(path);
  const int bid_col = csv.column("bid");
  const int p_col = csv.column("p_factual");
  const int y_col = csv.column("y");
  if (bid_col < 0 || p_col < 0 || y_col < 0)
    throw IngestionError("'" + path + "': expected columns bid, p_factual, y");

  PricingDataset ds;
  std::vector<int> xcols;
  for (std::size_t j = 0; j < csv.columns.size(); ++j)
    if (csv.columns[j].rfind("x_", 0) == 0) xcols.push_back(int(j));
  if (xcols.empty()) throw IngestionError("'" + path + "': no x_* covariate columns");

  ds.covariates.rows = csv.rows;
  ds.covariates.cols = xcols.size();
  ds.covariates.column_kinds.assign(xcols.size(), ColumnKind::continuous);
  ds.covariates.values.reserve(csv.rows * xcols.size());
  ds.bids.reserve(csv.rows);
  ds.accept_probs.reserve(csv.rows);
  ds.outcomes.reserve(csv.rows);
  for (std::size_t i = 0; i < csv.rows; ++i) {
    for (const int j : xcols) ds.covariates.values.push_back(csv.at(i, j));
    const double b = csv.at(i, std::size_t(bid_col));
    if (!(b >= 0.0 && b <= 1.0))
      throw IngestionError("'" + path + "': bid outside [0,1] at row " + std::to_string(i + 1));
    ds.bids.push_back(b);
    ds.accept_probs.push_back(csv.at(i, std::size_t(p_col)));
    const double y = csv.at(i, std::size_t(y_col));
    if (y != 0.0 && y != 1.0)
      throw IngestionError("'" + path + "': outcome not in {0,1} at row " + std::to_string(i + 1));
    ds.outcomes.push_back(int(y));
  }
  return ds;
}

}  // namespace bidbench
