#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bidbench/bias.hpp"
#include "bidbench/errors.hpp"
#include "bidbench/experiment.hpp"
#include "bidbench/ground_truth.hpp"
#include "bidbench/metrics.hpp"
#include "bidbench/models/fit.hpp"

// JSON documents for everything that crosses the process boundary: the
// generator spec written next to a dataset, experiment configs, fitted-model
// snapshots, and metric reports. Keys keep insertion order so identical
// inputs render identical bytes.
namespace bidbench {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json parse_json(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

inline const Json& field(const Json& j, const std::string& key) {
  const auto it = j.find(key);
  if (it == j.end()) throw IngestionError("document missing key '" + key + "'");
  return *it;
}

inline double as_real(const Json& j, const std::string& key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw IngestionError("key '" + key + "' must be a number");
  return v.get<double>();
}

inline std::uint64_t as_u64(const Json& j, const std::string& key) {
  const Json& v = field(j, key);
  if (!v.is_number_unsigned()) throw IngestionError("key '" + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

inline std::size_t as_count(const Json& j, const std::string& key) {
  return std::size_t(as_u64(j, key));
}

inline std::string as_string(const Json& j, const std::string& key) {
  const Json& v = field(j, key);
  if (!v.is_string()) throw IngestionError("key '" + key + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<double> as_real_vector(const Json& j, const std::string& key) {
  const Json& v = field(j, key);
  if (!v.is_array()) throw IngestionError("key '" + key + "' must be an array");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw IngestionError("key '" + key + "' must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

}  // namespace detail

inline Json to_json(const ScoreBounds& b) { return Json{{"lo", b.lo}, {"hi", b.hi}}; }

inline ScoreBounds score_bounds_from_json(const Json& j) {
  return {detail::as_real(j, "lo"), detail::as_real(j, "hi")};
}

inline Json to_json(const GroundTruthSpec& truth) {
  Json j;
  j["family"] = to_string(truth.family);
  j["noise_sd"] = truth.noise_sd;
  j["w1"] = truth.w1;
  j["w2"] = truth.w2;
  j["w3"] = truth.w3;
  j["w4"] = truth.w4;
  Json bounds = Json::array();
  for (const ScoreBounds& b : truth.score_bounds) bounds.push_back(to_json(b));
  j["score_bounds"] = bounds;
  return j;
}

inline GroundTruthSpec truth_from_json(const Json& j) {
  GroundTruthSpec truth;
  truth.family = family_from_string(detail::as_string(j, "family"));
  truth.noise_sd = detail::as_real(j, "noise_sd");
  truth.w1 = detail::as_real_vector(j, "w1");
  truth.w2 = detail::as_real_vector(j, "w2");
  truth.w3 = detail::as_real_vector(j, "w3");
  truth.w4 = detail::as_real_vector(j, "w4");
  const Json& bounds = detail::field(j, "score_bounds");
  if (!bounds.is_array() || bounds.size() != 4)
    throw IngestionError("key 'score_bounds' must be an array of 4 ranges");
  for (std::size_t k = 0; k < 4; ++k) truth.score_bounds[k] = score_bounds_from_json(bounds[k]);
  const std::size_t d = truth.w1.size();
  if (d == 0 || truth.w2.size() != d || truth.w3.size() != d || truth.w4.size() != d)
    throw IngestionError("weight vectors w1..w4 must share one non-zero length");
  return truth;
}

inline Json to_json(const BiasSpec& bias) {
  Json j;
  j["theta"] = bias.theta;
  j["w5"] = bias.w5;
  j["phi_bounds"] = to_json(bias.phi_bounds);
  return j;
}

inline BiasSpec bias_from_json(const Json& j) {
  BiasSpec bias;
  bias.theta = detail::as_real(j, "theta");
  if (!(bias.theta >= 0.0)) throw IngestionError("key 'theta' must be >= 0");
  bias.w5 = detail::as_real_vector(j, "w5");
  if (bias.w5.empty()) throw IngestionError("key 'w5' must be non-empty");
  bias.phi_bounds = score_bounds_from_json(detail::field(j, "phi_bounds"));
  return bias;
}

/// The document written next to a generated dataset: everything needed to
/// reproduce it or evaluate against its noiseless truth.
struct GeneratorDocument {
  GroundTruthSpec truth;
  BiasSpec bias;
  std::uint64_t seed = 0;
};

inline std::string render_generator_document(const GroundTruthSpec& truth, const BiasSpec& bias,
                                             std::uint64_t seed) {
  Json j;
  j["generator"] = to_json(truth);
  j["bias"] = to_json(bias);
  j["seed"] = seed;
  return j.dump(2) + "\n";
}

inline GeneratorDocument parse_generator_document(const std::string& text) {
  const Json j = detail::parse_json(text, "generator document");
  GeneratorDocument doc;
  doc.truth = truth_from_json(detail::field(j, "generator"));
  doc.bias = bias_from_json(detail::field(j, "bias"));
  doc.seed = detail::as_u64(j, "seed");
  return doc;
}

inline std::string render_config(const ExperimentConfig& config) {
  Json j;
  j["n"] = config.n;
  j["d"] = config.d;
  j["n_dummy"] = config.n_dummy;
  j["noise_sd"] = config.noise_sd;
  Json families = Json::array();
  for (const CurveFamily f : config.families) families.push_back(to_string(f));
  j["families"] = families;
  j["bias_levels"] = config.bias_levels;
  j["repetitions"] = config.repetitions;
  Json methods = Json::array();
  for (const Method m : config.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  j["seed"] = config.seed;
  j["grid_points"] = config.grid_points;
  j["workers"] = config.workers;
  j["grids"] = Json{{"random_forest", Json{{"trees", config.grids.random_forest.trees},
                                           {"max_depth", config.grids.random_forest.max_depth}}},
                    {"mlp", Json{{"width", config.grids.mlp.width},
                                 {"batch_size", config.grids.mlp.batch_size},
                                 {"steps", config.grids.mlp.steps},
                                 {"learning_rate", config.grids.mlp.learning_rate}}},
                    {"drnet", Json{{"strata", config.grids.drnet.strata},
                                   {"width", config.grids.drnet.net.width},
                                   {"batch_size", config.grids.drnet.net.batch_size},
                                   {"steps", config.grids.drnet.net.steps},
                                   {"learning_rate", config.grids.drnet.net.learning_rate}}},
                    {"vcnet", Json{{"width", config.grids.vcnet.net.width},
                                   {"batch_size", config.grids.vcnet.net.batch_size},
                                   {"steps", config.grids.vcnet.net.steps},
                                   {"learning_rate", config.grids.vcnet.net.learning_rate}}}};
  return j.dump(2) + "\n";
}

namespace detail {

inline std::vector<std::size_t> as_count_vector(const Json& j, const std::string& key) {
  const Json& v = field(j, key);
  if (!v.is_array()) throw IngestionError("key '" + key + "' must be an array");
  std::vector<std::size_t> out;
  for (const auto& e : v) {
    if (!e.is_number_unsigned())
      throw IngestionError("key '" + key + "' must hold non-negative integers");
    out.push_back(e.get<std::size_t>());
  }
  return out;
}

inline void apply_net_grid_keys(NetGrid& grid, const Json& j, const std::string& scope) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key == "width") grid.width = as_count_vector(j, key);
    else if (key == "batch_size") grid.batch_size = as_count_vector(j, key);
    else if (key == "steps") grid.steps = as_count_vector(j, key);
    else if (key == "learning_rate") grid.learning_rate = as_real_vector(j, key);
    else if (scope != "drnet" || key != "strata")
      throw ArgumentError("unknown config key 'grids." + scope + "." + key + "'");
  }
}

}  // namespace detail

/// Parse a config document. Absent keys keep their defaults; unknown keys are
/// rejected so a typo cannot silently fall back to a default.
inline ExperimentConfig parse_config(const std::string& text) {
  const Json j = detail::parse_json(text, "config document");
  if (!j.is_object()) throw IngestionError("config document must be a JSON object");
  ExperimentConfig config;
  for (const auto& [key, value] : j.items()) {
    if (key == "n") config.n = detail::as_count(j, key);
    else if (key == "d") config.d = detail::as_count(j, key);
    else if (key == "n_dummy") config.n_dummy = detail::as_count(j, key);
    else if (key == "noise_sd") config.noise_sd = detail::as_real(j, key);
    else if (key == "families") {
      if (!value.is_array()) throw IngestionError("key 'families' must be an array");
      config.families.clear();
      for (const auto& e : value) {
        if (!e.is_string()) throw IngestionError("key 'families' must hold strings");
        config.families.push_back(family_from_string(e.get<std::string>()));
      }
    } else if (key == "bias_levels") {
      config.bias_levels = detail::as_real_vector(j, key);
    } else if (key == "repetitions") {
      config.repetitions = detail::as_count(j, key);
    } else if (key == "methods") {
      if (!value.is_array()) throw IngestionError("key 'methods' must be an array");
      config.methods.clear();
      for (const auto& e : value) {
        if (!e.is_string()) throw IngestionError("key 'methods' must hold strings");
        config.methods.push_back(method_from_string(e.get<std::string>()));
      }
    } else if (key == "seed") {
      config.seed = detail::as_u64(j, key);
    } else if (key == "grid_points") {
      config.grid_points = detail::as_count(j, key);
    } else if (key == "workers") {
      config.workers = detail::as_count(j, key);
    } else if (key == "grids") {
      if (!value.is_object()) throw IngestionError("key 'grids' must be an object");
      for (const auto& [scope, sub] : value.items()) {
        if (scope == "random_forest") {
          for (const auto& [gk, gv] : sub.items()) {
            (void)gv;
            if (gk == "trees") config.grids.random_forest.trees = detail::as_count_vector(sub, gk);
            else if (gk == "max_depth")
              config.grids.random_forest.max_depth = detail::as_count_vector(sub, gk);
            else throw ArgumentError("unknown config key 'grids.random_forest." + gk + "'");
          }
        } else if (scope == "mlp") {
          detail::apply_net_grid_keys(config.grids.mlp, sub, "mlp");
        } else if (scope == "drnet") {
          detail::apply_net_grid_keys(config.grids.drnet.net, sub, "drnet");
          if (sub.contains("strata"))
            config.grids.drnet.strata = detail::as_count_vector(sub, "strata");
        } else if (scope == "vcnet") {
          detail::apply_net_grid_keys(config.grids.vcnet.net, sub, "vcnet");
        } else {
          throw ArgumentError("unknown config key 'grids." + scope + "'");
        }
      }
    } else {
      throw ArgumentError("unknown config key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

namespace detail {

inline Json dense_stack_layout(const net::LayerStack& stack) {
  Json layout = Json::array();
  for (const net::DenseLayer& l : stack.layers())
    layout.push_back(Json{{"out", l.out()}, {"activation", net::to_string(l.activation())}});
  return layout;
}

inline std::vector<std::pair<std::size_t, net::Activation>> layout_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw IngestionError("key 'layout' must be a non-empty array");
  std::vector<std::pair<std::size_t, net::Activation>> layout;
  for (const auto& e : j)
    layout.emplace_back(as_count(e, "out"),
                        net::activation_from_string(as_string(e, "activation")));
  return layout;
}

inline void restore_params(net::ParamStore& store, const std::vector<double>& params) {
  if (params.size() != store.size())
    throw IngestionError("parameter snapshot has " + std::to_string(params.size()) +
                         " entries, architecture expects " + std::to_string(store.size()));
  store.values() = params;
}

inline Json forest_to_json(const ForestModel& forest) {
  Json trees = Json::array();
  for (const DecisionTree& t : forest.trees()) {
    Json nodes = Json::array();
    for (const TreeNode& nd : t.nodes)
      nodes.push_back(Json::array({nd.feature, nd.threshold, nd.left, nd.right, nd.value}));
    trees.push_back(std::move(nodes));
  }
  return trees;
}

inline std::vector<DecisionTree> forest_from_json(const Json& j) {
  if (!j.is_array() || j.empty()) throw IngestionError("key 'trees' must be a non-empty array");
  std::vector<DecisionTree> trees;
  trees.reserve(j.size());
  for (const auto& tj : j) {
    DecisionTree tree;
    if (!tj.is_array() || tj.empty()) throw IngestionError("each tree must be a non-empty array");
    for (const auto& nj : tj) {
      if (!nj.is_array() || nj.size() != 5)
        throw IngestionError("each tree node must be a 5-entry array");
      for (const auto& e : nj)
        if (!e.is_number()) throw IngestionError("tree node entries must be numbers");
      TreeNode nd;
      nd.feature = nj[0].get<int>();
      nd.threshold = nj[1].get<double>();
      nd.left = nj[2].get<int>();
      nd.right = nj[3].get<int>();
      nd.value = nj[4].get<double>();
      tree.nodes.push_back(nd);
    }
    trees.push_back(std::move(tree));
  }
  return trees;
}

}  // namespace detail

/// Snapshot of a fitted model: method tag, training bid range, chosen
/// hyperparameters, and a per-method payload that reconstructs the response
/// surface exactly.
inline std::string render_model(const FittedModel& model) {
  Json j;
  j["method"] = to_string(model.method());
  j["dim"] = model.dim();
  j["train_bid_min"] = model.train_bid_min();
  j["train_bid_max"] = model.train_bid_max();
  j["hyperparameters"] = model.chosen_hyperparameters();

  Json payload = Json::object();
  switch (model.method()) {
    case Method::naive: break;
    case Method::logistic: {
      const auto& m = dynamic_cast<const LogisticModel&>(*model.impl());
      payload["coefficients"] = m.coefficients();
      break;
    }
    case Method::random_forest: {
      const auto& m = dynamic_cast<const ForestModel&>(*model.impl());
      payload["trees"] = detail::forest_to_json(m);
      break;
    }
    case Method::mlp: {
      const auto& m = dynamic_cast<const MlpModel&>(*model.impl());
      payload["input_dim"] = m.network().stack().input_dim();
      payload["layout"] = detail::dense_stack_layout(m.network().stack());
      payload["params"] = m.network().store().values();
      break;
    }
    case Method::hie: {
      const auto& m = dynamic_cast<const HieModel&>(*model.impl());
      payload["gps_coefficients"] = m.gps().coefficients;
      payload["gps_residual_sd"] = m.gps().residual_sd;
      payload["coefficients"] = m.coefficients();
      break;
    }
    case Method::drnet: {
      const auto& m = dynamic_cast<const DrnetModel&>(*model.impl());
      payload["width"] = m.body().layers().front().out();
      payload["n_heads"] = m.heads().size();
      payload["head_of_stratum"] = m.head_of_stratum();
      payload["params"] = m.store().values();
      break;
    }
    case Method::vcnet: {
      const auto& m = dynamic_cast<const VcnetModel&>(*model.impl());
      payload["width"] = m.body().layers().front().out();
      payload["params"] = m.store().values();
      break;
    }
    case Method::oracle: {
      const auto& m = dynamic_cast<const OracleModel&>(*model.impl());
      payload["truth"] = to_json(m.truth());
      break;
    }
  }
  j["payload"] = std::move(payload);
  return j.dump(2) + "\n";
}

inline FittedModel parse_model(const std::string& text) {
  const Json j = detail::parse_json(text, "model document");
  const Method method = method_from_string(detail::as_string(j, "method"));
  const std::size_t dim = detail::as_count(j, "dim");
  const double lo = detail::as_real(j, "train_bid_min");
  const double hi = detail::as_real(j, "train_bid_max");
  Hyperparams hp;
  if (j.contains("hyperparameters")) {
    const Json& h = j["hyperparameters"];
    if (!h.is_object()) throw IngestionError("key 'hyperparameters' must be an object");
    for (const auto& [k, v] : h.items()) {
      if (!v.is_string()) throw IngestionError("hyperparameter values must be strings");
      hp[k] = v.get<std::string>();
    }
  }
  const Json& payload = detail::field(j, "payload");

  std::shared_ptr<const ResponseModel> impl;
  switch (method) {
    case Method::naive: break;
    case Method::logistic:
      impl = std::make_shared<LogisticModel>(detail::as_real_vector(payload, "coefficients"));
      break;
    case Method::random_forest:
      impl = std::make_shared<ForestModel>(
          detail::forest_from_json(detail::field(payload, "trees")), dim);
      break;
    case Method::mlp: {
      net::DenseNetwork network(detail::as_count(payload, "input_dim"),
                                detail::layout_from_json(detail::field(payload, "layout")), 0);
      detail::restore_params(network.store(), detail::as_real_vector(payload, "params"));
      impl = std::make_shared<MlpModel>(std::move(network));
      break;
    }
    case Method::hie: {
      GpsModel gps;
      gps.coefficients = detail::as_real_vector(payload, "gps_coefficients");
      gps.residual_sd = detail::as_real(payload, "gps_residual_sd");
      if (!(gps.residual_sd > 0.0))
        throw IngestionError("key 'gps_residual_sd' must be positive");
      impl = std::make_shared<HieModel>(std::move(gps),
                                        detail::as_real_vector(payload, "coefficients"));
      break;
    }
    case Method::drnet: {
      auto model = std::make_shared<DrnetModel>(
          dim, detail::as_count(payload, "width"), detail::as_count(payload, "n_heads"),
          detail::as_count_vector(payload, "head_of_stratum"), 0);
      detail::restore_params(model->store(), detail::as_real_vector(payload, "params"));
      impl = std::move(model);
      break;
    }
    case Method::vcnet: {
      auto model = std::make_shared<VcnetModel>(dim, detail::as_count(payload, "width"), 0);
      detail::restore_params(model->store(), detail::as_real_vector(payload, "params"));
      impl = std::move(model);
      break;
    }
    case Method::oracle:
      impl = std::make_shared<OracleModel>(truth_from_json(detail::field(payload, "truth")));
      break;
  }
  return FittedModel(method, std::move(impl), std::move(hp), dim, lo, hi);
}

/// Flat key-value rendering of a metric report; inapplicable metrics are
/// simply absent.
inline std::string render_metrics(const MetricsReport& report) {
  Json j = Json::object();
  for (const auto& [k, v] : report.key_values()) j[k] = v;
  return j.dump(2) + "\n";
}

}  // namespace bidbench
