#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xover/common.hpp"
#include "xover/glm.hpp"
#include "xover/optimize.hpp"
#include "xover/sequence.hpp"

namespace xover {

// One fully-specified run: model, candidate sequences, criterion and
// optimizer settings, read from a JSON file.  Unknown keys are
// rejected so a typo cannot silently fall back to a default.
struct RunConfig {
  ModelSpec model;
  std::vector<TreatmentSequence> sequences;
  Criterion criterion = Criterion::DTheta;
  std::optional<std::vector<double>> proportions;
  OptimizerOptions optimizer;
  std::optional<std::string> out;
};

namespace detail {

using json = nlohmann::json;

inline void reject_unknown_keys(const json& j, const std::string& where,
                                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) {
      if (key == a) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ValidationError(where + ": unknown key '" + key + "'");
    }
  }
}

inline const json& require_key(const json& j, const std::string& where,
                               const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) {
    throw ValidationError(where + ": missing required key '" +
                          std::string(key) + "'");
  }
  return *it;
}

inline int get_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) {
    throw ValidationError(field + ": expected an integer");
  }
  return j.get<int>();
}

inline double get_double(const json& j, const std::string& field) {
  if (!j.is_number()) {
    throw ValidationError(field + ": expected a number");
  }
  return j.get<double>();
}

inline std::string get_string(const json& j, const std::string& field) {
  if (!j.is_string()) {
    throw ValidationError(field + ": expected a string");
  }
  return j.get<std::string>();
}

inline std::vector<double> get_double_array(const json& j,
                                            const std::string& field) {
  if (!j.is_array()) {
    throw ValidationError(field + ": expected an array of numbers");
  }
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) {
      throw ValidationError(field + ": expected an array of numbers");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  using detail::get_double;
  using detail::get_double_array;
  using detail::get_int;
  using detail::get_string;
  using detail::reject_unknown_keys;
  using detail::require_key;

  if (!j.is_object()) {
    throw ValidationError("config: expected a JSON object");
  }
  reject_unknown_keys(j, "config",
                      {"t", "p", "sequences", "theta", "family", "link",
                       "correlation", "criterion", "proportions", "optimizer",
                       "out"});

  RunConfig config;
  const int t = get_int(require_key(j, "config", "t"), "config.t");
  const int p = get_int(require_key(j, "config", "p"), "config.p");
  if (t < 2) throw ValidationError("config.t: need at least 2 treatments");
  if (p < 2) throw ValidationError("config.p: need at least 2 periods");

  const auto& seqs = require_key(j, "config", "sequences");
  if (!seqs.is_array() || seqs.empty()) {
    throw ValidationError("config.sequences: expected a nonempty array of strings");
  }
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const std::string field = "config.sequences[" + std::to_string(i) + "]";
    const std::string text = get_string(seqs[i], field);
    TreatmentSequence seq = parse_sequence(text, t);
    if (seq.period_count() != p) {
      throw ValidationError(field + ": sequence '" + text + "' has " +
                            std::to_string(seq.period_count()) +
                            " periods, expected " + std::to_string(p));
    }
    config.sequences.push_back(std::move(seq));
  }

  config.model.treatment_count = t;
  config.model.period_count = p;
  config.model.family =
      family_from_string(get_string(require_key(j, "config", "family"),
                                    "config.family"));
  config.model.link = link_from_string(
      get_string(require_key(j, "config", "link"), "config.link"));

  const std::vector<double> theta =
      get_double_array(require_key(j, "config", "theta"), "config.theta");
  const int m = parameter_count(t, p);
  if (static_cast<int>(theta.size()) != m) {
    throw ValidationError("config.theta: expected " + std::to_string(m) +
                          " entries (p + 2t - 2 = " + std::to_string(m) +
                          "), got " + std::to_string(theta.size()));
  }
  config.model.theta =
      Eigen::Map<const Vector>(theta.data(),
                               static_cast<Eigen::Index>(theta.size()));

  const auto& corr = require_key(j, "config", "correlation");
  if (!corr.is_object()) {
    throw ValidationError("config.correlation: expected an object");
  }
  reject_unknown_keys(corr, "config.correlation", {"structure", "alpha"});
  config.model.correlation.structure = correlation_structure_from_string(
      get_string(require_key(corr, "config.correlation", "structure"),
                 "config.correlation.structure"));
  if (corr.contains("alpha")) {
    config.model.correlation.alpha =
        get_double(corr["alpha"], "config.correlation.alpha");
  } else if (config.model.correlation.structure !=
             CorrelationStructure::Independence) {
    throw ValidationError("config.correlation: missing required key 'alpha'");
  }

  if (j.contains("criterion")) {
    config.criterion =
        criterion_from_string(get_string(j["criterion"], "config.criterion"));
  }

  if (j.contains("proportions")) {
    std::vector<double> props =
        get_double_array(j["proportions"], "config.proportions");
    if (props.size() != config.sequences.size()) {
      throw ValidationError("config.proportions: expected " +
                            std::to_string(config.sequences.size()) +
                            " entries, got " + std::to_string(props.size()));
    }
    double sum = 0.0;
    for (double w : props) {
      if (!(w >= 0.0)) {
        throw ValidationError("config.proportions: entries must be nonnegative");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      throw ValidationError("config.proportions: must sum to 1 (got " +
                            std::to_string(sum) + ")");
    }
    for (double& w : props) w /= sum;
    config.proportions = std::move(props);
  }

  if (j.contains("optimizer")) {
    const auto& opt = j["optimizer"];
    if (!opt.is_object()) {
      throw ValidationError("config.optimizer: expected an object");
    }
    reject_unknown_keys(opt, "config.optimizer",
                        {"method", "max_iterations", "tolerance",
                         "zero_threshold", "initial"});
    if (opt.contains("method")) {
      config.optimizer.method = optimize_method_from_string(
          get_string(opt["method"], "config.optimizer.method"));
    }
    if (opt.contains("max_iterations")) {
      config.optimizer.max_iterations =
          get_int(opt["max_iterations"], "config.optimizer.max_iterations");
      if (config.optimizer.max_iterations < 1) {
        throw ValidationError("config.optimizer.max_iterations: must be positive");
      }
    }
    if (opt.contains("tolerance")) {
      config.optimizer.tolerance =
          get_double(opt["tolerance"], "config.optimizer.tolerance");
      if (!(config.optimizer.tolerance > 0.0)) {
        throw ValidationError("config.optimizer.tolerance: must be positive");
      }
    }
    if (opt.contains("zero_threshold")) {
      config.optimizer.zero_threshold =
          get_double(opt["zero_threshold"], "config.optimizer.zero_threshold");
      if (!(config.optimizer.zero_threshold >= 0.0)) {
        throw ValidationError("config.optimizer.zero_threshold: must be nonnegative");
      }
    }
    if (opt.contains("initial")) {
      config.optimizer.initial =
          get_double_array(opt["initial"], "config.optimizer.initial");
    }
  }

  if (j.contains("out")) {
    config.out = get_string(j["out"], "config.out");
  }

  // Surfaces layout and domain problems (theta finiteness, alpha
  // bounds, canonical pairing) before any command runs.
  config.model.validate();
  for (std::size_t i = 0; i < config.sequences.size(); ++i) {
    for (std::size_t l = i + 1; l < config.sequences.size(); ++l) {
      if (config.sequences[i] == config.sequences[l]) {
        throw ValidationError("config.sequences: '" +
                              config.sequences[i].str() + "' repeats");
      }
    }
  }
  return config;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open config file '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " +
                          e.what());
  }
  return parse_run_config(j);
}

}  // namespace xover
