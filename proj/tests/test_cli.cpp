// Process-level tests of the bell-lab binary: exit codes, validation
// pointers, report content, and byte-level determinism.

#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bell_lab/json_io.hpp"

namespace fs = std::filesystem;
using bell_lab::ojson;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() /
          ("bell_lab_cli_test_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Sandbox() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  static int& counter() {
    static int n = 0;
    return n;
  }
  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out << text;
    return p;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args, const fs::path& stdout_path,
            const fs::path& stderr_path, const std::string& env = "") {
  const std::string cmd = env + (env.empty() ? "" : " ") + BELL_LAB_CLI_BIN + " " +
                          args + " >" + stdout_path.string() + " 2>" +
                          stderr_path.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kChshSingletConfig = R"({
  "experiment": "chsh",
  "model": {"type": "singlet-reference"},
  "settings": {"a": 0.0, "a_prime": 1.5707963267948966,
               "b": 0.7853981633974483, "b_prime": 5.497787143782138},
  "integration": {"method": "quadrature", "n": 1024}
})";

}  // namespace

TEST_CASE("chsh report for the singlet at the optimal tuple", "[cli]") {
  Sandbox box;
  const auto cfg = box.write("chsh.json", kChshSingletConfig);
  const auto out = box.dir / "out.json";
  const int code = run_cli("run " + cfg.string() + " --out " + (box.dir / "r.json").string(),
                           out, box.dir / "err.txt");
  REQUIRE(code == 0);
  const ojson report = ojson::parse(slurp(box.dir / "r.json"));
  REQUIRE(report["schema"] == "bell-lab/chsh-report/v1");
  REQUIRE(report["experiment"] == "chsh");
  REQUIRE(report["s_value"].get<double>() ==
          Catch::Approx(-2.8284271247461903).margin(1e-9));
  REQUIRE(report["abs_s"].get<double>() ==
          Catch::Approx(2.8284271247461903).margin(1e-9));
}

TEST_CASE("chsh csv layout", "[cli]") {
  Sandbox box;
  const auto cfg = box.write("chsh.json", kChshSingletConfig);
  const auto report = box.dir / "r.csv";
  const int code = run_cli("run " + cfg.string() + " --format csv --out " +
                               report.string(),
                           box.dir / "out.txt", box.dir / "err.txt");
  REQUIRE(code == 0);
  const std::string csv = slurp(report);
  REQUIRE(csv.rfind("settings,E_ab,E_ab',E_a'b,E_a'b',S,stderr\n", 0) == 0);
  REQUIRE(csv.find("-2.82842712475") != std::string::npos);
}

TEST_CASE("check-locality report for the phase model", "[cli]") {
  Sandbox box;
  const auto cfg = box.write("locality.json", R"({
    "experiment": "check-locality",
    "model": {"type": "unnikrishnan", "s": 0.5, "delta_phi": 3.141592653589793}
  })");
  const auto out = box.dir / "r.json";
  REQUIRE(run_cli("run " + cfg.string() + " --out " + out.string(), box.dir / "o.txt",
                  box.dir / "e.txt") == 0);
  const ojson report = ojson::parse(slurp(out));
  REQUIRE(report["schema"] == "bell-lab/check-locality-report/v1");
  bool saw_pi = false, saw_cc = false;
  for (const auto& r : report["reports"]) {
    if (r["check_name"] == "parameter-independence") {
      saw_pi = true;
      REQUIRE(r["verdict"] == "pass");
    }
    if (r["check_name"] == "condition-c") {
      saw_cc = true;
      REQUIRE(r["verdict"] == "fail");
      REQUIRE(r["max_residual"].get<double>() == Catch::Approx(0.25).margin(1e-9));
    }
  }
  REQUIRE(saw_pi);
  REQUIRE(saw_cc);
}

TEST_CASE("validation failures exit 1 with a json pointer", "[cli]") {
  Sandbox box;
  const auto cfg = box.write("bad.json", R"({"experiment": "chsh"})");
  const auto err = box.dir / "err.txt";
  REQUIRE(run_cli("run " + cfg.string(), box.dir / "out.txt", err) == 1);
  REQUIRE(slurp(err).find("/model") != std::string::npos);

  const auto unknown = box.write("unknown.json", R"({"experiment": "teleport"})");
  REQUIRE(run_cli("run " + unknown.string(), box.dir / "out.txt", err) == 1);
  REQUIRE(slurp(err).find("/experiment") != std::string::npos);

  const auto not_json = box.write("broken.json", "{nope");
  REQUIRE(run_cli("run " + not_json.string(), box.dir / "out.txt", err) == 1);

  REQUIRE(run_cli("run " + (box.dir / "missing.json").string(), box.dir / "out.txt",
                  err) == 1);
}

TEST_CASE("monte carlo requires a seed; flag beats environment beats config", "[cli]") {
  Sandbox box;
  const auto cfg = box.write("mc.json", R"({
    "experiment": "chsh",
    "model": {"type": "unnikrishnan"},
    "settings": {"a": 0.0, "a_prime": 1.5707963267948966,
                 "b": 0.7853981633974483, "b_prime": 2.356194490192345},
    "integration": {"method": "monte-carlo", "n": 2000}
  })");
  const auto err = box.dir / "err.txt";

  // No seed anywhere: validation error naming /integration/seed.
  REQUIRE(run_cli("run " + cfg.string(), box.dir / "out.txt", err) == 1);
  REQUIRE(slurp(err).find("/integration/seed") != std::string::npos);

  // Environment seed suffices.
  const auto env_out = box.dir / "env.json";
  REQUIRE(run_cli("run " + cfg.string() + " --out " + env_out.string(),
                  box.dir / "o.txt", err, "BELL_LAB_SEED=111") == 0);
  REQUIRE(ojson::parse(slurp(env_out))["integration"]["seed"].get<std::uint64_t>() ==
          111);

  // Flag wins over the environment.
  const auto flag_out = box.dir / "flag.json";
  REQUIRE(run_cli("run " + cfg.string() + " --seed 222 --out " + flag_out.string(),
                  box.dir / "o.txt", err, "BELL_LAB_SEED=111") == 0);
  REQUIRE(ojson::parse(slurp(flag_out))["integration"]["seed"].get<std::uint64_t>() ==
          222);
}

TEST_CASE("membership experiment accepts inline behaviors and models", "[cli]") {
  Sandbox box;
  const auto inline_cfg = box.write("pr.json", R"({
    "experiment": "polytope-membership",
    "behavior": {
      "settings_a": [0.0, 1.5707963267948966],
      "settings_b": [0.7853981633974483, 2.356194490192345],
      "cells": [[[0.5, 0, 0, 0.5], [0.5, 0, 0, 0.5]],
                [[0.5, 0, 0, 0.5], [0, 0.5, 0.5, 0]]]
    }
  })");
  const auto out = box.dir / "pr_report.json";
  REQUIRE(run_cli("run " + inline_cfg.string() + " --out " + out.string(),
                  box.dir / "o.txt", box.dir / "e.txt") == 0);
  const ojson pr = ojson::parse(slurp(out));
  REQUIRE(pr["verdict"]["status"] == "nonlocal");
  REQUIRE(pr["verdict"]["violated_inequality"]["value"].get<double>() ==
          Catch::Approx(4.0).margin(1e-9));

  const auto model_cfg = box.write("singlet.json", R"({
    "experiment": "polytope-membership",
    "model": {"type": "singlet-reference"},
    "settings": {"a": [0.0, 1.5707963267948966],
                 "b": [0.7853981633974483, 2.356194490192345]},
    "integration": {"method": "quadrature", "n": 256}
  })");
  const auto out2 = box.dir / "singlet_report.json";
  REQUIRE(run_cli("run " + model_cfg.string() + " --out " + out2.string(),
                  box.dir / "o.txt", box.dir / "e.txt") == 0);
  const ojson singlet = ojson::parse(slurp(out2));
  REQUIRE(singlet["verdict"]["status"] == "nonlocal");
  REQUIRE(singlet["verdict"]["violated_inequality"]["value"].get<double>() ==
          Catch::Approx(2.8284271247461903).margin(1e-9));

  // A vertex behavior through the exact path.
  const auto exact_cfg = box.write("vertex.json", R"({
    "experiment": "polytope-membership",
    "exact": true,
    "behavior": {
      "settings_a": [0.0, 1.5707963267948966],
      "settings_b": [0.7853981633974483, 2.356194490192345],
      "cells": [[[1, 0, 0, 0], [1, 0, 0, 0]],
                [[1, 0, 0, 0], [1, 0, 0, 0]]]
    }
  })");
  const auto out3 = box.dir / "vertex_report.json";
  REQUIRE(run_cli("run " + exact_cfg.string() + " --out " + out3.string(),
                  box.dir / "o.txt", box.dir / "e.txt") == 0);
  const ojson vertex = ojson::parse(slurp(out3));
  REQUIRE(vertex["verdict"]["status"] == "local");
  REQUIRE(vertex["verdict"]["weights"][0].get<double>() == 1.0);
}

TEST_CASE("hbt experiment emits reports and event dumps", "[cli]") {
  Sandbox box;
  const auto cfg = box.write("hbt.json", R"({
    "experiment": "hbt",
    "hbt": {"alpha1": 0.0, "alpha2": 0.0, "n_events": 20000, "seed": 5}
  })");
  const auto out = box.dir / "hbt.json.out";
  REQUIRE(run_cli("run " + cfg.string() + " --out " + out.string(), box.dir / "o.txt",
                  box.dir / "e.txt") == 0);
  const ojson report = ojson::parse(slurp(out));
  REQUIRE(report["schema"] == "bell-lab/hbt-report/v1");
  REQUIRE(report["fixed_h_covariance"].get<double>() == 0.0);
  REQUIRE(report["ensemble_covariance"].get<double>() ==
          Catch::Approx(0.5).margin(0.02));

  const auto csv_out = box.dir / "hbt.csv";
  REQUIRE(run_cli("run " + cfg.string() + " --format csv --out " + csv_out.string(),
                  box.dir / "o.txt", box.dir / "e.txt") == 0);
  const std::string csv = slurp(csv_out);
  REQUIRE(csv.rfind("theta,i1,i2,a,b\n", 0) == 0);
}

TEST_CASE("reports are byte-identical across runs and worker counts", "[cli]") {
  Sandbox box;
  const auto cfg = box.write("mc.json", R"({
    "experiment": "chsh",
    "model": {"type": "unnikrishnan"},
    "settings": {"a": 0.0, "a_prime": 1.5707963267948966,
                 "b": 0.7853981633974483, "b_prime": 5.497787143782138},
    "integration": {"method": "monte-carlo", "n": 50000, "seed": 31415}
  })");
  const auto r1 = box.dir / "r1.json";
  const auto r2 = box.dir / "r2.json";
  const auto r3 = box.dir / "r3.json";
  REQUIRE(run_cli("run " + cfg.string() + " --out " + r1.string(), box.dir / "o.txt",
                  box.dir / "e.txt") == 0);
  REQUIRE(run_cli("run " + cfg.string() + " --out " + r2.string(), box.dir / "o.txt",
                  box.dir / "e.txt") == 0);
  REQUIRE(run_cli("run " + cfg.string() + " --workers 4 --out " + r3.string(),
                  box.dir / "o.txt", box.dir / "e.txt") == 0);
  const std::string first = slurp(r1);
  REQUIRE_FALSE(first.empty());
  REQUIRE(first == slurp(r2));
  REQUIRE(first == slurp(r3));
}

TEST_CASE("unsupported format combinations are validation errors", "[cli]") {
  Sandbox box;
  const auto cfg = box.write("locality.json", R"({
    "experiment": "check-locality",
    "model": {"type": "deterministic-sign"}
  })");
  const auto err = box.dir / "err.txt";
  REQUIRE(run_cli("run " + cfg.string() + " --format csv", box.dir / "o.txt", err) == 1);
  REQUIRE(slurp(err).find("/output/format") != std::string::npos);
}

TEST_CASE("help and argument errors", "[cli]") {
  Sandbox box;
  REQUIRE(run_cli("--help", box.dir / "o.txt", box.dir / "e.txt") == 0);
  REQUIRE(run_cli("", box.dir / "o.txt", box.dir / "e.txt") != 0);
  REQUIRE(run_cli("run", box.dir / "o.txt", box.dir / "e.txt") == 1);
}
