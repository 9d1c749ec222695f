#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "bidbench/bias.hpp"
#include "bidbench/covariates.hpp"
#include "bidbench/dataset.hpp"
#include "bidbench/errors.hpp"
#include "bidbench/format.hpp"
#include "bidbench/ground_truth.hpp"
#include "bidbench/metrics.hpp"
#include "bidbench/models/fit.hpp"
#include "bidbench/rng.hpp"

namespace bidbench {

/// Full protocol description: what to generate, which methods to run, and how
/// densely to sweep the bias strength.
struct ExperimentConfig {
  std::size_t n = 2000;
  std::size_t d = 13;
  std::size_t n_dummy = 4;
  double noise_sd = 0.1;
  std::vector<CurveFamily> families{CurveFamily::richards, CurveFamily::stacked_sigmoid};
  std::vector<double> bias_levels{0.0, 2.5, 5.0, 7.5, 10.0, 15.0, 20.0};
  std::size_t repetitions = 10;
  std::vector<Method> methods = benchmark_methods();
  std::uint64_t seed = 1;
  MethodGrids grids;
  std::size_t grid_points = 65;
  std::size_t workers = 1;

  void validate() const {
    if (n < 10) throw ArgumentError("config: n must be >= 10");
    if (d == 0 || n_dummy >= d) throw ArgumentError("config: need 0 <= n_dummy < d and d >= 1");
    if (noise_sd < 0.0) throw ArgumentError("config: negative noise_sd");
    if (families.empty()) throw ArgumentError("config: no curve families");
    if (bias_levels.empty()) throw ArgumentError("config: no bias levels");
    for (const double t : bias_levels)
      if (!(t >= 0.0)) throw ArgumentError("config: bias levels must be >= 0");
    if (std::set<double>(bias_levels.begin(), bias_levels.end()).size() != bias_levels.size())
      throw ArgumentError("config: duplicate bias level");
    if (repetitions < 1) throw ArgumentError("config: repetitions must be >= 1");
    if (methods.empty()) throw ArgumentError("config: no methods");
    if (grid_points < 2) throw ArgumentError("config: grid_points must be >= 2");
    if (workers < 1) throw ArgumentError("config: workers must be >= 1");
  }
};

/// One (family, theta, repetition, method) result. `error` non-empty marks a
/// method that threw inside its cell; such records carry no metrics and are
/// skipped by aggregation. Wall time goes to the run log only, never into
/// result CSVs, so repeated runs stay byte-identical.
struct CellRecord {
  CurveFamily family = CurveFamily::richards;
  double theta = 0.0;
  std::size_t repetition = 0;
  Method method = Method::naive;
  MetricsReport metrics;
  std::string hyperparameters;
  double wall_time = 0.0;
  std::string error;

  bool ok() const { return error.empty(); }
};

/// Mean and standard deviation of each metric over the successful repetitions
/// of one (family, method, theta) cell group.
struct Aggregate {
  std::size_t count = 0;
  MetricsReport mean, sd;
};

struct ResultsTable {
  std::vector<CellRecord> records;

  Aggregate aggregate(CurveFamily family, Method method, double theta) const {
    std::vector<double> vals[4];
    std::size_t count = 0;
    for (const CellRecord& r : records) {
      if (r.family != family || r.method != method || r.theta != theta || !r.ok()) continue;
      ++count;
      const std::optional<double>* fields[4] = {&r.metrics.mise, &r.metrics.mise_r, &r.metrics.pe,
                                                &r.metrics.bs};
      for (int k = 0; k < 4; ++k)
        if (*fields[k]) vals[k].push_back(**fields[k]);
    }
    Aggregate agg;
    agg.count = count;
    std::optional<double>* means[4] = {&agg.mean.mise, &agg.mean.mise_r, &agg.mean.pe,
                                       &agg.mean.bs};
    std::optional<double>* sds[4] = {&agg.sd.mise, &agg.sd.mise_r, &agg.sd.pe, &agg.sd.bs};
    for (int k = 0; k < 4; ++k) {
      if (vals[k].empty()) continue;
      double m = 0.0;
      for (const double v : vals[k]) m += v;
      m /= double(vals[k].size());
      *means[k] = m;
      double ss = 0.0;
      for (const double v : vals[k]) ss += (v - m) * (v - m);
      *sds[k] = vals[k].size() > 1 ? std::sqrt(ss / double(vals[k].size() - 1)) : 0.0;
    }
    return agg;
  }

  std::vector<CurveFamily> families_present() const {
    std::vector<CurveFamily> out;
    for (const CurveFamily f : {CurveFamily::richards, CurveFamily::stacked_sigmoid})
      for (const CellRecord& r : records)
        if (r.family == f) {
          out.push_back(f);
          break;
        }
    return out;
  }

  std::vector<double> thetas_present(CurveFamily family) const {
    std::vector<double> out;
    for (const CellRecord& r : records)
      if (r.family == family && std::find(out.begin(), out.end(), r.theta) == out.end())
        out.push_back(r.theta);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<Method> methods_present(CurveFamily family) const {
    std::vector<Method> out;
    for (const Method m : {Method::naive, Method::logistic, Method::random_forest, Method::mlp,
                           Method::hie, Method::drnet, Method::vcnet, Method::oracle})
      for (const CellRecord& r : records)
        if (r.family == family && r.method == m) {
          out.push_back(m);
          break;
        }
    return out;
  }
};

/// Stable per-cell seed: cells are addressed by their coordinates, never by
/// execution order, so parallel sweeps reproduce serial ones bit for bit.
inline std::uint64_t cell_seed(const ExperimentConfig& config, CurveFamily family, double theta,
                               std::size_t repetition) {
  const std::string tag =
      to_string(family) + "|" + fmt_g17(theta) + "|" + std::to_string(repetition);
  return config.seed ^ stable_hash(tag);
}

/// The covariate matrix is shared by every cell of a sweep; only the
/// generator coefficients and bids are redrawn per cell.
inline CovariateMatrix sweep_covariates(const ExperimentConfig& config) {
  return synthesize_covariates(config.n, config.d, config.n_dummy,
                               derive_seed(config.seed, "covariates"));
}

namespace detail {
inline void log_line(std::vector<std::string>* log, std::string line) {
  if (log) log->push_back(std::move(line));
}

inline std::string cell_prefix(CurveFamily family, double theta, std::size_t repetition) {
  return "family=" + to_string(family) + " theta=" + fmt_g17(theta) +
         " rep=" + std::to_string(repetition);
}
}  // namespace detail

/// One protocol cell: generate a dataset at (family, theta), split it, and
/// run every configured method on the identical splits. A method failure is
/// recorded in its CellRecord and does not abort the remaining methods.
inline std::vector<CellRecord> run_cell(const ExperimentConfig& config,
                                        const CovariateMatrix& covariates, CurveFamily family,
                                        double theta, std::size_t repetition,
                                        std::vector<std::string>* log = nullptr) {
  config.validate();
  const std::uint64_t cseed = cell_seed(config, family, theta, repetition);
  const GroundTruthSpec truth =
      draw_ground_truth(family, covariates, config.noise_sd, derive_seed(cseed, "truth"));
  const BiasSpec bias = draw_bias(theta, covariates, derive_seed(cseed, "bias"));
  const PricingDataset ds = generate_dataset(covariates, truth, bias, derive_seed(cseed, "data"));
  const SplitDataset parts = split(ds, derive_seed(cseed, "split"));
  const BidGrid grid = BidGrid::from_training(parts.train, config.grid_points);

  std::vector<CellRecord> out;
  out.reserve(config.methods.size());
  for (const Method method : config.methods) {
    CellRecord rec;
    rec.family = family;
    rec.theta = theta;
    rec.repetition = repetition;
    rec.method = method;
    const auto started = std::chrono::steady_clock::now();
    try {
      std::vector<std::string> fit_log;
      const FittedModel model = fit_method(method, parts.train, parts.validation, config.grids,
                                           derive_seed(cseed, "fit/" + to_string(method)),
                                           &fit_log);
      rec.metrics = evaluate_model(model, parts.test, grid);
      rec.hyperparameters = to_string(model.chosen_hyperparameters());
      for (std::string& line : fit_log)
        detail::log_line(log, detail::cell_prefix(family, theta, repetition) +
                                  " method=" + to_string(method) + " " + std::move(line));
    } catch (const std::exception& e) {
      rec.error = e.what();
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    char timing[64];
    std::snprintf(timing, sizeof timing, " wall=%.2fs", rec.wall_time);
    detail::log_line(log, detail::cell_prefix(family, theta, repetition) +
                              " method=" + to_string(method) + timing +
                              (rec.ok() ? "" : " FAILED: " + rec.error));
    out.push_back(std::move(rec));
  }
  return out;
}

/// Convenience overload that synthesizes the sweep covariates itself.
inline std::vector<CellRecord> run_cell(const ExperimentConfig& config, CurveFamily family,
                                        double theta, std::size_t repetition,
                                        std::vector<std::string>* log = nullptr) {
  config.validate();
  const CovariateMatrix covariates = sweep_covariates(config);
  return run_cell(config, covariates, family, theta, repetition, log);
}

/// Full bias sweep: |families| x |bias_levels| x repetitions cells on a
/// bounded worker pool. Cell outputs land in slots indexed by coordinates, so
/// the merged table and log are identical no matter how workers interleave.
inline ResultsTable run_sweep(const ExperimentConfig& config,
                              std::vector<std::string>* log = nullptr) {
  config.validate();
  const CovariateMatrix covariates = sweep_covariates(config);

  struct CellCoord {
    CurveFamily family;
    double theta;
    std::size_t repetition;
  };
  std::vector<CellCoord> cells;
  for (const CurveFamily family : config.families)
    for (const double theta : config.bias_levels)
      for (std::size_t rep = 0; rep < config.repetitions; ++rep)
        cells.push_back({family, theta, rep});

  std::vector<std::vector<CellRecord>> slots(cells.size());
  std::vector<std::vector<std::string>> slot_logs(cells.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      const CellCoord& c = cells[i];
      slots[i] = run_cell(config, covariates, c.family, c.theta, c.repetition, &slot_logs[i]);
    }
  };

  const std::size_t n_workers = std::min(config.workers, cells.size());
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  ResultsTable table;
  table.records.reserve(cells.size() * config.methods.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (CellRecord& rec : slots[i]) table.records.push_back(std::move(rec));
    for (std::string& line : slot_logs[i]) detail::log_line(log, std::move(line));
  }
  return table;
}

/// One record per row, doubles rendered round-trip exactly. Deliberately
/// excludes wall time: this file is the determinism witness.
inline std::string results_csv(const ResultsTable& results) {
  const std::vector<std::string> columns{"family", "theta",  "repetition",      "method", "mise",
                                         "mise_r", "pe",     "bs",              "hyperparameters",
                                         "error"};
  std::vector<std::vector<std::string>> rows;
  rows.reserve(results.records.size());
  const auto cell = [](const std::optional<double>& v) { return v ? fmt_g17(*v) : std::string(); };
  for (const CellRecord& r : results.records)
    rows.push_back({to_string(r.family), fmt_g17(r.theta), std::to_string(r.repetition),
                    to_string(r.method), cell(r.metrics.mise), cell(r.metrics.mise_r),
                    cell(r.metrics.pe), cell(r.metrics.bs), r.hyperparameters, r.error});
  return render_csv(columns, rows);
}

enum class TableFormat { csv, markdown };

inline TableFormat table_format_from_string(const std::string& s) {
  if (s == "csv") return TableFormat::csv;
  if (s == "markdown" || s == "md") return TableFormat::markdown;
  throw ArgumentError("unknown table format '" + s + "'");
}

/// Summary table per family: rows are methods, columns are bias strengths,
/// cells are the mean of `metric` over repetitions to 3 decimals. "n.a."
/// marks methods the metric does not apply to; the best (lowest) value per
/// column is flagged -- bolded in markdown, a trailing '*' in CSV.
inline std::string emit_table(const ResultsTable& results, const std::string& metric,
                              TableFormat format) {
  if (std::find(metric_names().begin(), metric_names().end(), metric) == metric_names().end())
    throw ArgumentError("unknown metric '" + metric + "'");
  if (results.records.empty()) throw ArgumentError("emit_table: empty results");

  std::string out;
  for (const CurveFamily family : results.families_present()) {
    const std::vector<double> thetas = results.thetas_present(family);
    const std::vector<Method> methods = results.methods_present(family);

    // means[i][j]: method i at bias level j, absent where not applicable.
    std::vector<std::vector<std::optional<double>>> means(
        methods.size(), std::vector<std::optional<double>>(thetas.size()));
    for (std::size_t i = 0; i < methods.size(); ++i)
      for (std::size_t j = 0; j < thetas.size(); ++j)
        means[i][j] = results.aggregate(family, methods[i], thetas[j]).mean.by_name(metric);

    std::vector<std::optional<std::size_t>> best(thetas.size());
    for (std::size_t j = 0; j < thetas.size(); ++j)
      for (std::size_t i = 0; i < methods.size(); ++i) {
        if (!means[i][j]) continue;
        if (!best[j] || *means[i][j] < *means[*best[j]][j]) best[j] = i;
      }

    const auto fmt3 = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3f", v);
      return std::string(buf);
    };

    if (format == TableFormat::markdown) {
      out += "### " + to_string(family) + " / " + metric + "\n\n";
      out += "| method |";
      for (const double t : thetas) out += " theta=" + fmt_g17(t) + " |";
      out += "\n|---|";
      for (std::size_t j = 0; j < thetas.size(); ++j) out += "---|";
      out += "\n";
      for (std::size_t i = 0; i < methods.size(); ++i) {
        out += "| " + to_string(methods[i]) + " |";
        for (std::size_t j = 0; j < thetas.size(); ++j) {
          if (!means[i][j])
            out += " n.a. |";
          else if (best[j] && *best[j] == i)
            out += " **" + fmt3(*means[i][j]) + "** |";
          else
            out += " " + fmt3(*means[i][j]) + " |";
        }
        out += "\n";
      }
      out += "\n";
    } else {
      std::vector<std::string> columns{"family", "method"};
      for (const double t : thetas) columns.push_back("theta=" + fmt_g17(t));
      std::vector<std::vector<std::string>> rows;
      for (std::size_t i = 0; i < methods.size(); ++i) {
        std::vector<std::string> row{to_string(family), to_string(methods[i])};
        for (std::size_t j = 0; j < thetas.size(); ++j) {
          if (!means[i][j])
            row.push_back("n.a.");
          else if (best[j] && *best[j] == i)
            row.push_back(fmt3(*means[i][j]) + "*");
          else
            row.push_back(fmt3(*means[i][j]));
        }
        rows.push_back(std::move(row));
      }
      out += render_csv(columns, rows);
    }
  }
  return out;
}

}  // namespace bidbench
