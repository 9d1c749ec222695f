#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "bidbench/experiment.hpp"
#include "bidbench/serialize.hpp"

// Command-line front end: generate | fit | evaluate | sweep | inspect-curve.
// Exit codes: 0 success, 1 usage error (bad flags, bad input documents,
// inapplicable metric), 2 runtime failure.
namespace bidbench {

namespace cli_detail {

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

inline void ensure_dir(const std::string& dir) {
  if (!dir.empty()) std::filesystem::create_directories(dir);
}

struct GenerateOptions {
  std::string family = "richards";
  double theta = 0.0;
  std::uint64_t seed = 1;
  std::size_t n = 2000, d = 13, n_dummy = 4;
  double noise_sd = 0.1;
  std::string out_dir = ".";
};

inline int cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  const CurveFamily family = family_from_string(opt.family);
  const CovariateMatrix cov =
      synthesize_covariates(opt.n, opt.d, opt.n_dummy, derive_seed(opt.seed, "covariates"));
  const GroundTruthSpec truth =
      draw_ground_truth(family, cov, opt.noise_sd, derive_seed(opt.seed, "truth"));
  const BiasSpec bias = draw_bias(opt.theta, cov, derive_seed(opt.seed, "bias"));
  const PricingDataset ds = generate_dataset(cov, truth, bias, derive_seed(opt.seed, "data"));

  ensure_dir(opt.out_dir);
  const std::string data_path = join_path(opt.out_dir, "dataset.csv");
  const std::string doc_path = join_path(opt.out_dir, "generator.json");
  export_csv(ds, data_path);
  write_text_file(doc_path, render_generator_document(truth, bias, opt.seed));
  out << "wrote " << data_path << " (" << ds.size() << " rows)\n";
  out << "wrote " << doc_path << "\n";
  return 0;
}

struct FitOptions {
  std::string method;
  std::string data_path;
  std::string config_path;     // optional: hyperparameter grids
  std::string generator_path;  // optional: attaches the ground truth (oracle fits need it)
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  std::string out_path;  // optional: overrides out_dir/model_<method>.json
};

inline int cmd_fit(const FitOptions& opt, std::ostream& out) {
  const Method method = method_from_string(opt.method);
  PricingDataset ds = import_csv(opt.data_path);
  if (!opt.generator_path.empty())
    ds.truth = parse_generator_document(read_text_file(opt.generator_path)).truth;

  MethodGrids grids;
  if (!opt.config_path.empty()) grids = parse_config(read_text_file(opt.config_path)).grids;

  const SplitDataset parts = split(ds, derive_seed(opt.seed, "split"));
  std::vector<std::string> log;
  const FittedModel model =
      fit_method(method, parts.train, parts.validation, grids,
                 derive_seed(opt.seed, "fit/" + to_string(method)), &log);

  std::string path = opt.out_path;
  if (path.empty()) {
    ensure_dir(opt.out_dir);
    path = join_path(opt.out_dir, "model_" + to_string(method) + ".json");
  } else if (const auto parent = std::filesystem::path(path).parent_path(); !parent.empty()) {
    std::filesystem::create_directories(parent);
  }
  write_text_file(path, render_model(model));

  for (const std::string& line : log) out << line << "\n";
  const std::string hp = to_string(model.chosen_hyperparameters());
  out << "fit " << to_string(method) << (hp.empty() ? "" : " [" + hp + "]") << " on "
      << parts.train.size() << " rows\n";
  out << "wrote " << path << "\n";
  return 0;
}

struct EvaluateOptions {
  std::string model_path;
  std::string data_path;
  std::string generator_path;  // optional; required by truth-based metrics
  std::string metric = "all";
  std::size_t grid_points = 65;
};

inline int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream& err) {
  const FittedModel model = parse_model(read_text_file(opt.model_path));
  PricingDataset data = import_csv(opt.data_path);
  if (!opt.generator_path.empty())
    data.truth = parse_generator_document(read_text_file(opt.generator_path)).truth;
  const BidGrid grid =
      BidGrid::uniform(model.train_bid_min(), model.train_bid_max(), opt.grid_points);

  const auto need_truth = [&]() -> ResponseFn {
    if (!data.truth)
      throw ArgumentError("metric '" + opt.metric +
                          "' compares against the ground truth; pass --generator");
    return response_fn(*data.truth);
  };

  try {
    if (opt.metric == "all") {
      need_truth();
      out << render_metrics(evaluate_model(model, data, grid));
      return 0;
    }
    double value = 0.0;
    if (opt.metric == "mise") value = mise(model, data, need_truth(), grid);
    else if (opt.metric == "mise_r") value = mise_revenue(model, data, need_truth(), grid);
    else if (opt.metric == "pe") value = policy_error(model, data, need_truth(), grid);
    else if (opt.metric == "bs") value = brier(model, data, grid);
    else throw ArgumentError("unknown metric '" + opt.metric + "'");
    out << opt.metric << "=" << fmt_g17(value) << "\n";
    return 0;
  } catch (const NotApplicableError& e) {
    err << "metric not applicable: " << e.what() << "\n";
    return 1;
  }
}

struct SweepOptions {
  std::string config_path;
  std::string family;  // restricts the sweep to one family when set
  bool theta_set = false;
  double theta = 0.0;
  bool seed_set = false;
  std::uint64_t seed = 0;
  bool workers_set = false;
  std::size_t workers = 1;
  std::string format = "markdown";
  std::string out_dir = ".";
};

inline int cmd_sweep(const SweepOptions& opt, std::ostream& out) {
  ExperimentConfig config;
  if (!opt.config_path.empty()) config = parse_config(read_text_file(opt.config_path));
  if (!opt.family.empty()) config.families = {family_from_string(opt.family)};
  if (opt.theta_set) config.bias_levels = {opt.theta};
  if (opt.seed_set) config.seed = opt.seed;
  if (opt.workers_set) config.workers = opt.workers;
  const TableFormat format = table_format_from_string(opt.format);
  config.validate();

  ensure_dir(opt.out_dir);
  write_text_file(join_path(opt.out_dir, "config.json"), render_config(config));

  std::vector<std::string> log;
  const ResultsTable table = run_sweep(config, &log);

  write_text_file(join_path(opt.out_dir, "results.csv"), results_csv(table));
  std::string log_text;
  for (const std::string& line : log) log_text += line + "\n";
  write_text_file(join_path(opt.out_dir, "run.log"), log_text);

  const char* ext = format == TableFormat::markdown ? ".md" : ".csv";
  for (const std::string& metric : metric_names())
    write_text_file(join_path(opt.out_dir, "table_" + metric + ext),
                    emit_table(table, metric, format));

  std::size_t failures = 0;
  for (const CellRecord& r : table.records) failures += r.ok() ? 0 : 1;
  out << "sweep: " << table.records.size() << " records";
  if (failures > 0) out << " (" << failures << " failed; see results.csv and run.log)";
  out << "\n";
  out << "wrote " << join_path(opt.out_dir, "results.csv") << ", run.log, config.json";
  for (const std::string& metric : metric_names()) out << ", table_" << metric << ext;
  out << "\n";
  return 0;
}

struct InspectOptions {
  std::string model_path;
  std::string data_path;
  std::string generator_path;
  std::size_t row = 0;
  std::size_t grid_points = 65;
};

inline int cmd_inspect_curve(const InspectOptions& opt, std::ostream& out, std::ostream& err) {
  const FittedModel model = parse_model(read_text_file(opt.model_path));
  const PricingDataset data = import_csv(opt.data_path);
  const GeneratorDocument doc = parse_generator_document(read_text_file(opt.generator_path));
  if (opt.row >= data.size())
    throw ArgumentError("row " + std::to_string(opt.row) + " out of range (dataset has " +
                        std::to_string(data.size()) + " rows)");
  const BidGrid grid =
      BidGrid::uniform(model.train_bid_min(), model.train_bid_max(), opt.grid_points);
  const auto x = data.covariates.row(opt.row);

  try {
    out << "b,mu,mu_hat\n";
    for (const double b : grid.values)
      out << fmt_g17(b) << "," << fmt_g17(true_response(doc.truth, b, x)) << ","
          << fmt_g17(model.predict_response(b, x)) << "\n";
    return 0;
  } catch (const NotApplicableError& e) {
    err << "metric not applicable: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cli_detail

/// Parse and run one CLI invocation. `args` holds the arguments in natural
/// order, without the program name. Returns the process exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"benchmarking laboratory for bid-response estimation under selection bias"};
  app.require_subcommand(1);

  cli_detail::GenerateOptions gen;
  CLI::App* c_gen = app.add_subcommand("generate", "generate a synthetic pricing dataset");
  c_gen->add_option("--family", gen.family, "curve family: richards | stacked_sigmoid")
      ->capture_default_str();
  c_gen->add_option("--theta", gen.theta, "bid selection-bias strength, >= 0")
      ->capture_default_str();
  c_gen->add_option("--seed", gen.seed, "generator seed")->capture_default_str();
  c_gen->add_option("--n", gen.n, "rows")->capture_default_str();
  c_gen->add_option("--d", gen.d, "covariate columns")->capture_default_str();
  c_gen->add_option("--n-dummy", gen.n_dummy, "how many columns are binary dummies")
      ->capture_default_str();
  c_gen->add_option("--noise-sd", gen.noise_sd, "sd of the observation noise on p_factual")
      ->capture_default_str();
  c_gen->add_option("--out-dir", gen.out_dir, "output directory")
      ->envname("BIDBENCH_OUT_DIR")
      ->capture_default_str();

  cli_detail::FitOptions fit;
  CLI::App* c_fit = app.add_subcommand("fit", "train one method on a dataset CSV");
  c_fit->add_option("--method", fit.method,
                    "naive | logistic | random_forest | mlp | hie | drnet | vcnet | oracle")
      ->required();
  c_fit->add_option("--data", fit.data_path, "dataset CSV (from `generate`)")->required();
  c_fit->add_option("--config", fit.config_path, "config document supplying hyperparameter grids");
  c_fit->add_option("--generator", fit.generator_path,
                    "generator document; attaches the ground truth (oracle fits need it)");
  c_fit->add_option("--seed", fit.seed, "split/training seed")->capture_default_str();
  c_fit->add_option("--out", fit.out_path, "model file (default: <out-dir>/model_<method>.json)");
  c_fit->add_option("--out-dir", fit.out_dir, "output directory")
      ->envname("BIDBENCH_OUT_DIR")
      ->capture_default_str();

  cli_detail::EvaluateOptions ev;
  CLI::App* c_eval = app.add_subcommand("evaluate", "score a serialized model on a dataset");
  c_eval->add_option("--model", ev.model_path, "model document (from `fit`)")->required();
  c_eval->add_option("--data", ev.data_path, "dataset CSV to evaluate on")->required();
  c_eval->add_option("--generator", ev.generator_path,
                     "generator document; required by mise/mise_r/pe");
  c_eval->add_option("--metric", ev.metric, "mise | mise_r | pe | bs | all")
      ->capture_default_str();
  c_eval->add_option("--grid-points", ev.grid_points, "bid-grid resolution")
      ->capture_default_str();

  cli_detail::SweepOptions sw;
  CLI::App* c_sweep = app.add_subcommand("sweep", "run the full bias-sweep protocol");
  c_sweep->add_option("--config", sw.config_path, "config document (defaults when omitted)");
  c_sweep->add_option("--family", sw.family, "restrict to one curve family");
  CLI::Option* o_theta = c_sweep->add_option("--theta", sw.theta, "restrict to one bias level");
  CLI::Option* o_seed = c_sweep->add_option("--seed", sw.seed, "override the config seed");
  CLI::Option* o_workers = c_sweep->add_option("--workers", sw.workers, "worker threads");
  c_sweep->add_option("--format", sw.format, "summary-table format: markdown | csv")
      ->capture_default_str();
  c_sweep->add_option("--out-dir", sw.out_dir, "output directory")
      ->envname("BIDBENCH_OUT_DIR")
      ->capture_default_str();

  cli_detail::InspectOptions ins;
  CLI::App* c_inspect = app.add_subcommand(
      "inspect-curve", "print (b, mu, mu_hat) triples over the bid grid for one row");
  c_inspect->add_option("--model", ins.model_path, "model document")->required();
  c_inspect->add_option("--data", ins.data_path, "dataset CSV")->required();
  c_inspect->add_option("--generator", ins.generator_path, "generator document")->required();
  c_inspect->add_option("--row", ins.row, "dataset row to condition on")->capture_default_str();
  c_inspect->add_option("--grid-points", ins.grid_points, "bid-grid resolution")
      ->capture_default_str();

  try {
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  sw.theta_set = o_theta->count() > 0;
  sw.seed_set = o_seed->count() > 0;
  sw.workers_set = o_workers->count() > 0;

  try {
    if (app.got_subcommand(c_gen)) return cli_detail::cmd_generate(gen, out);
    if (app.got_subcommand(c_fit)) return cli_detail::cmd_fit(fit, out);
    if (app.got_subcommand(c_eval)) return cli_detail::cmd_evaluate(ev, out, err);
    if (app.got_subcommand(c_sweep)) return cli_detail::cmd_sweep(sw, out);
    if (app.got_subcommand(c_inspect)) return cli_detail::cmd_inspect_curve(ins, out, err);
    err << "error: no subcommand\n";
    return 1;
  } catch (const NotApplicableError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const IngestionError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "runtime failure: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace bidbench
