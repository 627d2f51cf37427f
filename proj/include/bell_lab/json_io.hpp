#pragma once

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bell_lab/behavior.hpp"
#include "bell_lab/correlation.hpp"
#include "bell_lab/hbt.hpp"
#include "bell_lab/locality.hpp"
#include "bell_lab/models.hpp"
#include "bell_lab/polytope.hpp"

namespace bell_lab {

/// Insertion-ordered JSON so emitted reports have a stable key layout.
using ojson = nlohmann::ordered_json;

/// Rounds to `digits` significant decimal digits. Report floats pass through
/// this before serialization so output bytes are reproducible.
inline double round_sig(double x, int digits = 12) {
  if (x == 0.0 || !std::isfinite(x)) return x == 0.0 ? 0.0 : x;  // drop -0.0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return std::strtod(buf, nullptr);
}

/// Validation failure with the JSON-pointer path of the offending field.
struct config_error : std::runtime_error {
  std::string pointer;
  config_error(const std::string& message, std::string pointer_path)
      : std::runtime_error(message + " (at " + pointer_path + ")"),
        pointer(std::move(pointer_path)) {}
};

namespace jsonio {

inline const ojson& require(const ojson& j, const std::string& key,
                            const std::string& pointer) {
  if (!j.is_object() || !j.contains(key)) {
    throw config_error("missing required field", pointer + "/" + key);
  }
  return j.at(key);
}

inline double require_number(const ojson& j, const std::string& key,
                             const std::string& pointer) {
  const ojson& v = require(j, key, pointer);
  if (!v.is_number()) throw config_error("expected a number", pointer + "/" + key);
  return v.get<double>();
}

inline double number_or(const ojson& j, const std::string& key, double fallback,
                        const std::string& pointer) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  const ojson& v = j.at(key);
  if (!v.is_number()) throw config_error("expected a number", pointer + "/" + key);
  return v.get<double>();
}

inline std::string require_string(const ojson& j, const std::string& key,
                                  const std::string& pointer) {
  const ojson& v = require(j, key, pointer);
  if (!v.is_string()) throw config_error("expected a string", pointer + "/" + key);
  return v.get<std::string>();
}

inline std::vector<Setting> settings_list(const ojson& v, const std::string& pointer) {
  if (!v.is_array() || v.empty()) {
    throw config_error("expected a nonempty array of angles", pointer);
  }
  std::vector<Setting> out;
  out.reserve(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) {
      throw config_error("expected a number", pointer + "/" + std::to_string(k));
    }
    out.emplace_back(v[k].get<double>());
  }
  return out;
}

inline ojson angles_json(const std::vector<Setting>& settings) {
  ojson arr = ojson::array();
  for (const Setting& s : settings) arr.push_back(round_sig(s.radians()));
  return arr;
}

}  // namespace jsonio

// ---------------------------------------------------------------------------
// Behavior
// ---------------------------------------------------------------------------

inline ojson to_json(const Behavior& behavior) {
  ojson j;
  j["settings_a"] = jsonio::angles_json(behavior.settings_a);
  j["settings_b"] = jsonio::angles_json(behavior.settings_b);
  ojson rows = ojson::array();
  for (std::size_t i = 0; i < behavior.n_a(); ++i) {
    ojson row = ojson::array();
    for (std::size_t j2 = 0; j2 < behavior.n_b(); ++j2) {
      ojson cell = ojson::array();
      for (double p : behavior.cell(i, j2).p) cell.push_back(round_sig(p));
      row.push_back(std::move(cell));
    }
    rows.push_back(std::move(row));
  }
  j["cells"] = std::move(rows);
  return j;
}

inline Behavior behavior_from_json(const ojson& j, const std::string& pointer = "") {
  const auto settings_a = jsonio::settings_list(jsonio::require(j, "settings_a", pointer),
                                                pointer + "/settings_a");
  const auto settings_b = jsonio::settings_list(jsonio::require(j, "settings_b", pointer),
                                                pointer + "/settings_b");
  const ojson& cells = jsonio::require(j, "cells", pointer);
  if (!cells.is_array() || cells.size() != settings_a.size()) {
    throw config_error("cells must have one row per settings_a entry",
                       pointer + "/cells");
  }
  Behavior behavior = make_behavior(settings_a, settings_b);
  for (std::size_t i = 0; i < settings_a.size(); ++i) {
    const ojson& row = cells[i];
    const std::string row_ptr = pointer + "/cells/" + std::to_string(i);
    if (!row.is_array() || row.size() != settings_b.size()) {
      throw config_error("cells row must have one entry per settings_b entry", row_ptr);
    }
    for (std::size_t jj = 0; jj < settings_b.size(); ++jj) {
      const ojson& cell = row[jj];
      const std::string cell_ptr = row_ptr + "/" + std::to_string(jj);
      if (!cell.is_array() || cell.size() != 4) {
        throw config_error("cell must be [p++, p+-, p-+, p--]", cell_ptr);
      }
      for (std::size_t o = 0; o < 4; ++o) {
        if (!cell[o].is_number()) {
          throw config_error("expected a number", cell_ptr + "/" + std::to_string(o));
        }
        behavior.cell(i, jj).p[o] = cell[o].get<double>();
      }
    }
  }
  try {
    validate_behavior(behavior, 1e-9);
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what(), pointer + "/cells");
  }
  return behavior;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline ojson to_json(const WorstCase& worst) {
  ojson j = ojson::object();
  for (const auto& [key, value] : worst.tags) j[key] = value;
  for (const auto& [key, value] : worst.coords) j[key] = round_sig(value);
  if (!worst.hidden.empty()) {
    ojson h = ojson::array();
    for (double v : worst.hidden) h.push_back(round_sig(v));
    j["hidden"] = std::move(h);
  }
  return j;
}

inline ojson to_json(const LocalityReport& report) {
  ojson j;
  j["check_name"] = report.check_name;
  j["verdict"] = report.pass ? "pass" : "fail";
  j["max_residual"] = round_sig(report.max_residual);
  j["tolerance"] = round_sig(report.tolerance);
  j["worst_case"] = to_json(report.worst_case);
  j["grid_spec"] = report.grid_spec;
  return j;
}

inline LocalityReport locality_report_from_json(const ojson& j,
                                                const std::string& pointer = "") {
  LocalityReport report;
  report.check_name = jsonio::require_string(j, "check_name", pointer);
  report.pass = jsonio::require_string(j, "verdict", pointer) == "pass";
  report.max_residual = jsonio::require_number(j, "max_residual", pointer);
  report.tolerance = jsonio::require_number(j, "tolerance", pointer);
  report.grid_spec = jsonio::require_string(j, "grid_spec", pointer);
  const ojson& worst = jsonio::require(j, "worst_case", pointer);
  for (const auto& [key, value] : worst.items()) {
    if (value.is_string()) {
      report.worst_case.tags.emplace_back(key, value.get<std::string>());
    } else if (value.is_number()) {
      report.worst_case.coords.emplace_back(key, value.get<double>());
    } else if (key == "hidden" && value.is_array()) {
      for (const auto& v : value) report.worst_case.hidden.push_back(v.get<double>());
    }
  }
  return report;
}

inline ojson to_json(const ChshSettings& settings) {
  ojson j;
  j["a"] = round_sig(settings.a.radians());
  j["a_prime"] = round_sig(settings.a_prime.radians());
  j["b"] = round_sig(settings.b.radians());
  j["b_prime"] = round_sig(settings.b_prime.radians());
  return j;
}

inline ojson to_json(const Estimate& estimate) {
  ojson j;
  j["value"] = round_sig(estimate.value);
  if (estimate.std_error) j["std_error"] = round_sig(*estimate.std_error);
  return j;
}

inline ojson to_json(const ChshResult& result) {
  ojson j;
  j["settings"] = to_json(result.settings);
  ojson correlators;
  correlators["e_ab"] = to_json(result.correlators[0]);
  correlators["e_ab_prime"] = to_json(result.correlators[1]);
  correlators["e_a_prime_b"] = to_json(result.correlators[2]);
  correlators["e_a_prime_b_prime"] = to_json(result.correlators[3]);
  j["correlators"] = std::move(correlators);
  j["s_value"] = round_sig(result.s_value);
  j["abs_s"] = round_sig(result.abs_s());
  if (result.estimator_stderr) j["estimator_stderr"] = round_sig(*result.estimator_stderr);
  return j;
}

/// CSV row for a CHSH result:
///   settings,E_ab,E_ab',E_a'b,E_a'b',S,stderr
/// with the four setting angles joined by ';' in the first column.
inline std::string chsh_result_csv(const ChshResult& result) {
  char buf[64];
  auto fmt = [&buf](double x) {
    std::snprintf(buf, sizeof(buf), "%.12g", round_sig(x));
    return std::string(buf);
  };
  std::string out = "settings,E_ab,E_ab',E_a'b,E_a'b',S,stderr\n";
  out += fmt(result.settings.a.radians()) + ";" + fmt(result.settings.a_prime.radians()) +
         ";" + fmt(result.settings.b.radians()) + ";" +
         fmt(result.settings.b_prime.radians());
  for (const Estimate& e : result.correlators) out += "," + fmt(e.value);
  out += "," + fmt(result.s_value);
  out += ",";
  if (result.estimator_stderr) out += fmt(*result.estimator_stderr);
  out += "\n";
  return out;
}

inline ojson to_json(const MembershipVerdict& verdict) {
  ojson j;
  j["status"] = verdict.status == MembershipStatus::local ? "local" : "nonlocal";
  if (verdict.status == MembershipStatus::local) {
    ojson w = ojson::array();
    for (double v : verdict.weights) w.push_back(round_sig(v));
    j["weights"] = std::move(w);
    j["reconstruction_error"] = round_sig(verdict.reconstruction_error);
  }
  if (verdict.violated_inequality) {
    ojson v;
    v["index"] = verdict.violated_inequality->index;
    v["value"] = round_sig(verdict.violated_inequality->value);
    j["violated_inequality"] = std::move(v);
  }
  j["gap"] = round_sig(verdict.gap);
  return j;
}

inline ojson to_json(const HbtReport& report) {
  ojson j;
  j["ensemble_covariance"] = round_sig(report.ensemble_covariance);
  j["ensemble_covariance_stderr"] = round_sig(report.ensemble_covariance_stderr);
  j["fixed_h_covariance"] = round_sig(report.fixed_h_covariance);
  j["binary_behavior"] = to_json(report.binary_behavior);
  j["chsh_of_binary"] = to_json(report.chsh_of_binary);
  return j;
}

// ---------------------------------------------------------------------------
// Model descriptors
// ---------------------------------------------------------------------------

/// A model parsed from its JSON description. `local` is set for factorized
/// models; `joint` is always usable.
struct ParsedModel {
  std::string type;
  std::optional<LocalModel> local;
  JointModel joint;
};

/// Builds a model from {"type": ..., parameters...}. Supported types:
///   deterministic-sign      opposite-sign strategies over a shared angle
///   cosine-stochastic       smooth half-amplitude cosine responses
///   deterministic-constant  fixed outcomes (fields outcome_a, outcome_b)
///   unnikrishnan            phase model (fields s, delta_phi)
///   singlet-reference       singlet prediction as a trivial-source model
///   hbt                     intensity-threshold model (field threshold)
inline ParsedModel model_from_json(const ojson& j, const std::string& pointer) {
  if (!j.is_object()) throw config_error("model must be an object", pointer);
  ParsedModel parsed;
  parsed.type = jsonio::require_string(j, "type", pointer);
  if (parsed.type == "deterministic-sign") {
    parsed.local = opposite_sign_model();
  } else if (parsed.type == "cosine-stochastic") {
    parsed.local = cosine_response_model();
  } else if (parsed.type == "deterministic-constant") {
    const double a = jsonio::number_or(j, "outcome_a", 1.0, pointer);
    const double b = jsonio::number_or(j, "outcome_b", 1.0, pointer);
    if (a != 1.0 && a != -1.0) throw config_error("outcome_a must be +1 or -1",
                                                  pointer + "/outcome_a");
    if (b != 1.0 && b != -1.0) throw config_error("outcome_b must be +1 or -1",
                                                  pointer + "/outcome_b");
    parsed.local = constant_outcome_model(static_cast<int>(a), static_cast<int>(b));
  } else if (parsed.type == "unnikrishnan") {
    UnnikrishnanParams params;
    params.s = jsonio::number_or(j, "s", 0.5, pointer);
    params.delta_phi = jsonio::number_or(j, "delta_phi", kPi, pointer);
    if (!(params.s > 0.0)) throw config_error("s must be > 0", pointer + "/s");
    parsed.joint = unnikrishnan_model(params);
    return parsed;
  } else if (parsed.type == "singlet-reference") {
    parsed.joint = singlet_reference_model();
    return parsed;
  } else if (parsed.type == "hbt") {
    parsed.local = hbt_model(jsonio::number_or(j, "threshold", 1.0, pointer));
  } else {
    throw config_error("unknown model type: " + parsed.type, pointer + "/type");
  }
  parsed.joint = as_joint(*parsed.local);
  return parsed;
}

}  // namespace bell_lab
