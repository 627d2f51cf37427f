#pragma once

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bell_lab/json_io.hpp"

namespace bell_lab {

/// Command-line overrides. Seed precedence: --seed flag, then BELL_LAB_SEED,
/// then the config file.
struct CliOverrides {
  std::optional<std::string> out_path;
  std::optional<std::string> format;
  std::optional<std::uint64_t> seed;
  int workers = 1;
};

struct RunOutput {
  ojson report;
  std::string format;  // "json" or "csv"
  std::string bytes;
  std::optional<std::string> out_path;
};

namespace cli_detail {

inline std::optional<std::uint64_t> env_seed() {
  const char* raw = std::getenv("BELL_LAB_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0') {
    throw config_error("BELL_LAB_SEED must be a nonnegative integer", "BELL_LAB_SEED");
  }
  return static_cast<std::uint64_t>(v);
}

inline std::optional<std::uint64_t> resolve_seed(const ojson& owner,
                                                 const std::string& key,
                                                 const std::string& pointer,
                                                 const CliOverrides& overrides) {
  if (overrides.seed) return overrides.seed;
  if (auto env = env_seed()) return env;
  if (owner.is_object() && owner.contains(key)) {
    const ojson& v = owner.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      throw config_error("seed must be an integer", pointer + "/" + key);
    }
    return v.get<std::uint64_t>();
  }
  return std::nullopt;
}

inline IntegrationSpec integration_from_config(const ojson& config,
                                               const CliOverrides& overrides) {
  IntegrationSpec spec;
  spec.workers = overrides.workers;
  if (!config.contains("integration")) {
    if (auto seed = resolve_seed(ojson::object(), "seed", "/integration", overrides)) {
      spec.seed = *seed;
    }
    return spec;
  }
  const ojson& j = config.at("integration");
  if (!j.is_object()) throw config_error("integration must be an object", "/integration");
  const std::string method =
      j.contains("method") ? jsonio::require_string(j, "method", "/integration")
                           : "quadrature";
  if (method == "quadrature") {
    spec.method = IntegrationMethod::quadrature;
  } else if (method == "monte-carlo") {
    spec.method = IntegrationMethod::monte_carlo;
  } else {
    throw config_error("method must be quadrature or monte-carlo",
                       "/integration/method");
  }
  const double n = jsonio::number_or(j, "n", 4096.0, "/integration");
  if (!(n >= 1.0)) throw config_error("n must be >= 1", "/integration/n");
  spec.n = static_cast<std::size_t>(n);
  const auto seed = resolve_seed(j, "seed", "/integration", overrides);
  if (seed) {
    spec.seed = *seed;
  } else if (spec.method == IntegrationMethod::monte_carlo) {
    throw config_error("monte-carlo integration requires a seed",
                       "/integration/seed");
  }
  return spec;
}

inline ojson integration_echo(const IntegrationSpec& spec) {
  ojson j;
  j["method"] =
      spec.method == IntegrationMethod::quadrature ? "quadrature" : "monte-carlo";
  j["n"] = spec.n;
  if (spec.method == IntegrationMethod::monte_carlo) j["seed"] = spec.seed;
  return j;
}

inline Setting require_angle(const ojson& j, const std::string& key,
                             const std::string& pointer) {
  return Setting(jsonio::require_number(j, key, pointer));
}

inline std::string fmt_g12(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", round_sig(x));
  return std::string(buf);
}

// --- experiment handlers ---------------------------------------------------

inline RunOutput run_correlate(const ojson& config, const CliOverrides& overrides,
                               const std::string& format) {
  const ParsedModel model = model_from_json(jsonio::require(config, "model", ""), "/model");
  const ojson& settings = jsonio::require(config, "settings", "");
  const auto a = jsonio::settings_list(jsonio::require(settings, "a", "/settings"),
                                       "/settings/a");
  const auto b = jsonio::settings_list(jsonio::require(settings, "b", "/settings"),
                                       "/settings/b");
  const IntegrationSpec spec = integration_from_config(config, overrides);

  std::vector<std::vector<Estimate>> estimates(a.size(), std::vector<Estimate>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      estimates[i][j] = model.local
                            ? correlation_local(*model.local, a[i], b[j], spec)
                            : correlation_joint(model.joint, a[i], b[j], spec);
    }
  }

  RunOutput out;
  out.format = format;
  out.report["schema"] = "bell-lab/correlate-report/v1";
  out.report["experiment"] = "correlate";
  out.report["model"] = config.at("model");
  out.report["integration"] = integration_echo(spec);
  out.report["settings_a"] = jsonio::angles_json(a);
  out.report["settings_b"] = jsonio::angles_json(b);
  ojson values = ojson::array();
  ojson errors = ojson::array();
  bool any_stderr = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ojson vrow = ojson::array();
    ojson erow = ojson::array();
    for (std::size_t j = 0; j < b.size(); ++j) {
      vrow.push_back(round_sig(estimates[i][j].value));
      if (estimates[i][j].std_error) {
        erow.push_back(round_sig(*estimates[i][j].std_error));
        any_stderr = true;
      }
    }
    values.push_back(std::move(vrow));
    errors.push_back(std::move(erow));
  }
  out.report["correlators"] = std::move(values);
  if (any_stderr) out.report["std_errors"] = std::move(errors);

  if (format == "csv") {
    std::string csv = "a_index,b_index,a,b,E,stderr\n";
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = 0; j < b.size(); ++j) {
        csv += std::to_string(i) + "," + std::to_string(j) + "," +
               fmt_g12(a[i].radians()) + "," + fmt_g12(b[j].radians()) + "," +
               fmt_g12(estimates[i][j].value) + ",";
        if (estimates[i][j].std_error) csv += fmt_g12(*estimates[i][j].std_error);
        csv += "\n";
      }
    }
    out.bytes = std::move(csv);
  }
  return out;
}

inline ChshSettings chsh_settings_from_config(const ojson& config) {
  const ojson& settings = jsonio::require(config, "settings", "");
  return ChshSettings{require_angle(settings, "a", "/settings"),
                      require_angle(settings, "a_prime", "/settings"),
                      require_angle(settings, "b", "/settings"),
                      require_angle(settings, "b_prime", "/settings")};
}

inline RunOutput run_chsh(const ojson& config, const CliOverrides& overrides,
                          const std::string& format) {
  const ParsedModel model = model_from_json(jsonio::require(config, "model", ""), "/model");
  const ChshSettings settings = chsh_settings_from_config(config);
  const IntegrationSpec spec = integration_from_config(config, overrides);
  const ChshResult result = model.local ? chsh(*model.local, settings, spec)
                                        : chsh(model.joint, settings, spec);
  RunOutput out;
  out.format = format;
  out.report["schema"] = "bell-lab/chsh-report/v1";
  out.report["experiment"] = "chsh";
  out.report["model"] = config.at("model");
  out.report["integration"] = integration_echo(spec);
  out.report.update(to_json(result));
  if (format == "csv") out.bytes = chsh_result_csv(result);
  return out;
}

inline RunOutput run_maximize(const ojson& config, const CliOverrides& overrides,
                              const std::string& format) {
  const ParsedModel model = model_from_json(jsonio::require(config, "model", ""), "/model");
  const IntegrationSpec spec = integration_from_config(config, overrides);
  ChshSearchSpec search;
  if (config.contains("search")) {
    const ojson& s = config.at("search");
    if (!s.is_object()) throw config_error("search must be an object", "/search");
    search.grid_n = static_cast<int>(jsonio::number_or(s, "grid_n", 16.0, "/search"));
    search.refine_iters =
        static_cast<int>(jsonio::number_or(s, "refine_iters", 3.0, "/search"));
    if (search.grid_n < 8) throw config_error("grid_n must be >= 8", "/search/grid_n");
    if (search.refine_iters < 0) {
      throw config_error("refine_iters must be >= 0", "/search/refine_iters");
    }
  }
  const CorrelatorFn correlator = model.local ? correlator_fn(*model.local, spec)
                                              : correlator_fn(model.joint, spec);
  const ChshResult best = maximize_chsh_over_settings(correlator, search);
  RunOutput out;
  out.format = format;
  out.report["schema"] = "bell-lab/maximize-report/v1";
  out.report["experiment"] = "maximize";
  out.report["model"] = config.at("model");
  out.report["integration"] = integration_echo(spec);
  ojson search_echo;
  search_echo["grid_n"] = search.grid_n;
  search_echo["refine_iters"] = search.refine_iters;
  out.report["search"] = std::move(search_echo);
  out.report["best"] = to_json(best);
  if (format == "csv") out.bytes = chsh_result_csv(best);
  return out;
}

inline RunOutput run_check_locality(const ojson& config, const CliOverrides& overrides,
                                    const std::string& format) {
  if (format != "json") {
    throw config_error("check-locality supports json output only", "/output/format");
  }
  const ParsedModel model = model_from_json(jsonio::require(config, "model", ""), "/model");
  int n_settings = 24;
  int n_hidden = 32;
  std::uint64_t grid_seed = kDefaultGridSeed;
  if (config.contains("grid")) {
    const ojson& g = config.at("grid");
    if (!g.is_object()) throw config_error("grid must be an object", "/grid");
    n_settings = static_cast<int>(jsonio::number_or(g, "n_settings", 24.0, "/grid"));
    n_hidden = static_cast<int>(jsonio::number_or(g, "n_hidden", 32.0, "/grid"));
    if (n_settings < 1) throw config_error("n_settings must be >= 1", "/grid/n_settings");
    if (n_hidden < 1) throw config_error("n_hidden must be >= 1", "/grid/n_hidden");
    if (auto seed = resolve_seed(g, "seed", "/grid", overrides)) grid_seed = *seed;
  } else if (auto seed = resolve_seed(ojson::object(), "seed", "/grid", overrides)) {
    grid_seed = *seed;
  }
  const double tol = jsonio::number_or(config, "tolerance", kDefaultTol, "");

  const CheckGrid grid = default_check_grid(model.joint, n_settings, n_hidden, grid_seed);
  RunOutput out;
  out.format = format;
  out.report["schema"] = "bell-lab/check-locality-report/v1";
  out.report["experiment"] = "check-locality";
  out.report["model"] = config.at("model");
  out.report["grid_spec"] = grid.spec;
  out.report["tolerance"] = round_sig(tol);
  ojson reports = ojson::array();
  reports.push_back(to_json(check_condition_c(model.joint, grid, tol)));
  reports.push_back(to_json(check_parameter_independence(model.joint, grid, tol)));
  reports.push_back(to_json(check_outcome_independence(model.joint, grid, tol)));
  out.report["reports"] = std::move(reports);
  return out;
}

inline RunOutput run_membership(const ojson& config, const CliOverrides& overrides,
                                const std::string& format) {
  if (format != "json") {
    throw config_error("polytope-membership supports json output only",
                       "/output/format");
  }
  Behavior behavior;
  RunOutput out;
  if (config.contains("behavior")) {
    behavior = behavior_from_json(config.at("behavior"), "/behavior");
    out.report["schema"] = "bell-lab/polytope-membership-report/v1";
    out.report["experiment"] = "polytope-membership";
    out.report["behavior"] = to_json(behavior);
  } else if (config.contains("model")) {
    const ParsedModel model = model_from_json(config.at("model"), "/model");
    const ojson& settings = jsonio::require(config, "settings", "");
    const auto a = jsonio::settings_list(jsonio::require(settings, "a", "/settings"),
                                         "/settings/a");
    const auto b = jsonio::settings_list(jsonio::require(settings, "b", "/settings"),
                                         "/settings/b");
    if (a.size() != 2 || b.size() != 2) {
      throw config_error("membership needs exactly 2 settings per wing", "/settings");
    }
    const IntegrationSpec spec = integration_from_config(config, overrides);
    behavior = behavior_from_model(model.joint, a, b, spec);
    out.report["schema"] = "bell-lab/polytope-membership-report/v1";
    out.report["experiment"] = "polytope-membership";
    out.report["model"] = config.at("model");
    out.report["integration"] = integration_echo(spec);
    out.report["behavior"] = to_json(behavior);
  } else {
    throw config_error("missing required field", "/behavior");
  }

  bool exact = false;
  if (config.contains("exact")) {
    if (!config.at("exact").is_boolean()) {
      throw config_error("exact must be a boolean", "/exact");
    }
    exact = config.at("exact").get<bool>();
  }
  const double tol = jsonio::number_or(config, "tolerance", kDefaultTol, "");
  const MembershipVerdict verdict =
      exact ? membership_exact(behavior, 1000000, tol) : membership(behavior, tol);
  out.format = format;
  out.report["exact"] = exact;
  out.report["tolerance"] = round_sig(tol);
  out.report["verdict"] = to_json(verdict);
  ojson forms = ojson::array();
  for (double v : chsh_inequalities(behavior)) forms.push_back(round_sig(v));
  out.report["chsh_inequalities"] = std::move(forms);
  return out;
}

inline HbtConfig hbt_config_from_json(const ojson& config, const CliOverrides& overrides) {
  const ojson& j = jsonio::require(config, "hbt", "");
  if (!j.is_object()) throw config_error("hbt must be an object", "/hbt");
  HbtConfig hbt;
  hbt.alpha1 = jsonio::number_or(j, "alpha1", 0.0, "/hbt");
  hbt.alpha2 = jsonio::number_or(j, "alpha2", 0.0, "/hbt");
  const double n = jsonio::number_or(j, "n_events", 100000.0, "/hbt");
  if (!(n >= 1.0)) throw config_error("n_events must be >= 1", "/hbt/n_events");
  hbt.n_events = static_cast<std::uint64_t>(n);
  const auto seed = resolve_seed(j, "seed", "/hbt", overrides);
  if (!seed) throw config_error("hbt requires a seed", "/hbt/seed");
  hbt.seed = *seed;
  hbt.threshold = jsonio::number_or(j, "threshold", 1.0, "/hbt");
  if (j.contains("settings_a")) {
    hbt.settings_a = jsonio::settings_list(j.at("settings_a"), "/hbt/settings_a");
  }
  if (j.contains("settings_b")) {
    hbt.settings_b = jsonio::settings_list(j.at("settings_b"), "/hbt/settings_b");
  }
  if (hbt.settings_a.size() != 2 || hbt.settings_b.size() != 2) {
    throw config_error("hbt binary behavior needs 2 settings per wing",
                       "/hbt/settings_a");
  }
  hbt.workers = overrides.workers;
  return hbt;
}

inline RunOutput run_hbt(const ojson& config, const CliOverrides& overrides,
                         const std::string& format) {
  const HbtConfig hbt = hbt_config_from_json(config, overrides);
  RunOutput out;
  out.format = format;
  if (format == "csv") {
    // Raw event dump: theta,i1,i2,a,b. Streams are walked in ascending index
    // order so the byte stream is worker-count independent.
    std::string csv = "theta,i1,i2,a,b\n";
    for_each_stream(static_cast<std::size_t>(hbt.n_events), hbt.seed, 1,
                    [&](std::size_t, std::size_t count, RandomStream& rng) {
                      for (std::size_t i = 0; i < count; ++i) {
                        const double theta = rng.uniform_angle();
                        const double i1 = hbt_intensity(theta, hbt.alpha1);
                        const double i2 = hbt_intensity(theta, hbt.alpha2);
                        const int a = i1 >= hbt.threshold ? +1 : -1;
                        const int b = i2 >= hbt.threshold ? +1 : -1;
                        csv += fmt_g12(theta) + "," + fmt_g12(i1) + "," + fmt_g12(i2) +
                               "," + (a > 0 ? "+1" : "-1") + "," +
                               (b > 0 ? "+1" : "-1") + "\n";
                      }
                    });
    out.bytes = std::move(csv);
  }
  const HbtReport report = hbt_run(hbt);
  out.report["schema"] = "bell-lab/hbt-report/v1";
  out.report["experiment"] = "hbt";
  ojson echo;
  echo["alpha1"] = round_sig(hbt.alpha1);
  echo["alpha2"] = round_sig(hbt.alpha2);
  echo["n_events"] = hbt.n_events;
  echo["seed"] = hbt.seed;
  echo["threshold"] = round_sig(hbt.threshold);
  echo["settings_a"] = jsonio::angles_json(hbt.settings_a);
  echo["settings_b"] = jsonio::angles_json(hbt.settings_b);
  out.report["config"] = std::move(echo);
  out.report.update(to_json(report));
  return out;
}

}  // namespace cli_detail

/// Runs one experiment config. Returns the report (and, for csv formats, the
/// serialized table in `bytes`); throws config_error on validation problems.
inline RunOutput run_experiment_config(const ojson& config, const CliOverrides& overrides) {
  if (!config.is_object()) throw config_error("config must be an object", "");
  const std::string experiment = jsonio::require_string(config, "experiment", "");

  std::string format = "json";
  std::optional<std::string> out_path;
  if (config.contains("output")) {
    const ojson& output = config.at("output");
    if (!output.is_object()) throw config_error("output must be an object", "/output");
    if (output.contains("format")) {
      format = jsonio::require_string(output, "format", "/output");
    }
    if (output.contains("path")) {
      out_path = jsonio::require_string(output, "path", "/output");
    }
  }
  if (overrides.format) format = *overrides.format;
  if (format != "json" && format != "csv") {
    throw config_error("format must be json or csv", "/output/format");
  }
  if (overrides.out_path) out_path = overrides.out_path;

  RunOutput out;
  if (experiment == "correlate") {
    out = cli_detail::run_correlate(config, overrides, format);
  } else if (experiment == "chsh") {
    out = cli_detail::run_chsh(config, overrides, format);
  } else if (experiment == "maximize") {
    out = cli_detail::run_maximize(config, overrides, format);
  } else if (experiment == "check-locality") {
    out = cli_detail::run_check_locality(config, overrides, format);
  } else if (experiment == "polytope-membership") {
    out = cli_detail::run_membership(config, overrides, format);
  } else if (experiment == "hbt") {
    out = cli_detail::run_hbt(config, overrides, format);
  } else {
    throw config_error("unknown experiment: " + experiment, "/experiment");
  }
  if (out.format == "json") out.bytes = out.report.dump(2) + "\n";
  out.out_path = out_path;
  return out;
}

/// `bell-lab run <config.json> [--out PATH] [--format json|csv] [--workers N]
/// [--seed S]`. Exit status: 0 success, 1 validation error, 2 runtime error.
inline int cli_main(int argc, const char* const* argv, std::ostream& out_stream,
                    std::ostream& err_stream) {
  CLI::App app{"Bell-locality experiment driver"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "run one experiment config");
  std::string config_path;
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  CliOverrides overrides;
  std::string out_path;
  std::string format;
  std::uint64_t seed = 0;
  auto* out_opt = run->add_option("--out", out_path, "report path (default: config, else stdout)");
  auto* format_opt = run->add_option("--format", format, "json or csv");
  run->add_option("--workers", overrides.workers, "worker threads for Monte Carlo")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed, "seed override (beats BELL_LAB_SEED)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out_stream, err_stream);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out_stream, err_stream);
    return 1;
  }
  if (*out_opt) overrides.out_path = out_path;
  if (*format_opt) overrides.format = format;
  if (*seed_opt) overrides.seed = seed;

  try {
    std::ifstream in(config_path);
    if (!in) {
      err_stream << "error: cannot open config: " << config_path << "\n";
      return 1;
    }
    ojson config;
    try {
      config = ojson::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      err_stream << "error: config is not valid JSON: " << e.what() << "\n";
      return 1;
    }
    const RunOutput result = run_experiment_config(config, overrides);
    if (result.out_path) {
      std::ofstream file(*result.out_path, std::ios::binary | std::ios::trunc);
      if (!file) {
        err_stream << "error: cannot write report: " << *result.out_path << "\n";
        return 2;
      }
      file << result.bytes;
    } else {
      out_stream << result.bytes;
    }
    return 0;
  } catch (const config_error& e) {
    err_stream << "validation error at " << e.pointer << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err_stream << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace bell_lab
