#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "bell_lab/hbt.hpp"
#include "support/oracles.hpp"

using namespace bell_lab;

// =============================================================================
// Intensity law
// =============================================================================

TEST_CASE("intensity values", "[hbt]") {
  REQUIRE(hbt_intensity(0.0, 0.0) == 2.0);
  REQUIRE(hbt_intensity(kPi, 0.0) == Catch::Approx(0.0).margin(1e-15));
  REQUIRE(hbt_intensity(kPi / 3, 0.0) == Catch::Approx(1.5).margin(1e-15));
  REQUIRE(hbt_intensity(kPi / 6, kPi / 6) == Catch::Approx(1.5).margin(1e-15));
  for (double theta : {0.1, 1.0, 3.0, 6.0}) {
    REQUIRE(hbt_intensity(theta, 0.7) >= 0.0);
    REQUIRE(hbt_intensity(theta, 0.7) <= 2.0);
  }
}

TEST_CASE("the threshold model is a deterministic factorized model", "[hbt]") {
  const LocalModel model = hbt_model(1.0);
  REQUIRE(model.deterministic);
  RandomStream rng(3);
  for (int i = 0; i < 50; ++i) {
    HiddenSample h{{rng.uniform_angle()}, 1.0};
    const double pa = model.response_a(Setting(rng.uniform_angle()), h);
    REQUIRE((pa == 0.0 || pa == 1.0));
  }
}

// =============================================================================
// Ensemble covariance
// =============================================================================

TEST_CASE("ensemble covariance tracks cos(alpha1-alpha2)/2", "[hbt][oracle]") {
  for (double delta : {0.0, kPi / 4, kPi / 2, kPi}) {
    HbtConfig config;
    config.alpha1 = 0.3;
    config.alpha2 = 0.3 + delta;
    config.n_events = 100000;
    config.seed = 1234;
    const HbtReport report = hbt_run(config);
    const double expected = oracles::hbt_covariance_expected(config.alpha1, config.alpha2);
    // The closed form itself is backed by a quadrature oracle.
    REQUIRE(oracles::hbt_covariance_quadrature(config.alpha1, config.alpha2) ==
            Catch::Approx(expected).margin(1e-9));
    INFO("delta " << delta);
    REQUIRE(report.ensemble_covariance ==
            Catch::Approx(expected).margin(5.0 * report.ensemble_covariance_stderr));
    REQUIRE(report.ensemble_covariance_stderr > 0.0);
    REQUIRE(report.ensemble_covariance_stderr < 0.01);
  }
}

TEST_CASE("covariance standard error matches a stored-events oracle", "[hbt][oracle]") {
  HbtConfig config;
  config.alpha1 = 0.0;
  config.alpha2 = kPi / 3;
  config.n_events = 20000;
  config.seed = 777;
  const HbtReport report = hbt_run(config);

  // Regenerate the identical event stream and recompute the standard error
  // from stored samples.
  std::vector<double> xs, ys;
  xs.reserve(config.n_events);
  ys.reserve(config.n_events);
  for_each_stream(config.n_events, config.seed, 1,
                  [&](std::size_t, std::size_t count, RandomStream& rng) {
                    for (std::size_t i = 0; i < count; ++i) {
                      const double theta = rng.uniform_angle();
                      xs.push_back(std::cos(theta + config.alpha1));
                      ys.push_back(std::cos(theta + config.alpha2));
                    }
                  });
  REQUIRE(report.ensemble_covariance_stderr ==
          Catch::Approx(oracles::covariance_stderr_from_events(xs, ys)).margin(1e-12));
}

TEST_CASE("fixed-phase covariance is exactly zero", "[hbt]") {
  for (std::uint64_t seed : {1, 2, 99}) {
    HbtConfig config;
    config.alpha1 = 0.9;
    config.alpha2 = 2.7;
    config.n_events = 5000;
    config.seed = seed;
    REQUIRE(hbt_run(config).fixed_h_covariance == 0.0);
  }
}

TEST_CASE("shifted covariance helper", "[hbt]") {
  // Constant sequences: exactly zero, no rounding residue.
  const std::vector<double> c1(100, 1.2345678901234567);
  const std::vector<double> c2(100, 0.9876543210987654);
  REQUIRE(detail::shifted_covariance(c1, c2) == 0.0);
  // Agrees with the naive two-pass covariance on generic data.
  RandomStream rng(8);
  std::vector<double> xs(500), ys(500);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = rng.uniform01();
    ys[i] = 2.0 * xs[i] + rng.uniform01();
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(ys.size());
  double cov = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) cov += (xs[i] - mx) * (ys[i] - my);
  cov /= static_cast<double>(xs.size());
  REQUIRE(detail::shifted_covariance(xs, ys) == Catch::Approx(cov).margin(1e-12));
}

// =============================================================================
// Binary behavior stays local
// =============================================================================

TEST_CASE("binary behaviors satisfy every CHSH facet and stay local",
          "[hbt][property]") {
  RandomStream angles(606);
  for (int trial = 0; trial < 6; ++trial) {
    HbtConfig config;
    config.alpha1 = 0.0;
    config.alpha2 = kPi / 4;
    config.n_events = 20000;
    config.seed = static_cast<std::uint64_t>(3000 + trial);
    if (trial > 0) {
      config.settings_a = {Setting(angles.uniform_angle()), Setting(angles.uniform_angle())};
      config.settings_b = {Setting(angles.uniform_angle()), Setting(angles.uniform_angle())};
    }
    const HbtReport report = hbt_run(config);
    const auto forms = chsh_inequalities(report.binary_behavior);
    INFO("trial " << trial);
    REQUIRE(*std::max_element(forms.begin(), forms.end()) <= 2.0 + 1e-9);
    REQUIRE(std::fabs(report.chsh_of_binary.s_value) <= 2.0 + 1e-9);
    const auto verdict = membership(report.binary_behavior);
    REQUIRE(verdict.status == MembershipStatus::local);
    REQUIRE(verdict.reconstruction_error <= 1e-9);
  }
}

TEST_CASE("locality audit: correlated intensities, factorized fixed-h model",
          "[hbt]") {
  HbtConfig config;
  config.alpha1 = 0.0;
  config.alpha2 = 0.0;  // maximal intensity correlation
  config.n_events = 100000;
  config.seed = 4321;
  const HbtAudit audit = hbt_locality_audit(config);
  // Ensemble correlation is plainly nonzero ...
  REQUIRE(audit.ensemble_covariance > 0.4);
  // ... while the fixed-h conditional factorizes exactly ...
  REQUIRE(audit.condition_c.max_residual == 0.0);
  REQUIRE(audit.condition_c.pass);
  REQUIRE(audit.fixed_h_covariance == 0.0);
  // ... and the observable binary behavior is inside the local polytope.
  REQUIRE(audit.membership.status == MembershipStatus::local);
  REQUIRE(std::fabs(audit.chsh_of_binary.s_value) <= 2.0 + 1e-9);
}

// =============================================================================
// Determinism
// =============================================================================

TEST_CASE("reports are reproducible and worker invariant", "[hbt]") {
  HbtConfig config;
  config.alpha1 = 0.2;
  config.alpha2 = 1.4;
  config.n_events = 30000;
  config.seed = 2718;
  const HbtReport first = hbt_run(config);
  const HbtReport second = hbt_run(config);
  config.workers = 5;
  const HbtReport threaded = hbt_run(config);
  for (const HbtReport* other : {&second, &threaded}) {
    REQUIRE(first.ensemble_covariance == other->ensemble_covariance);
    REQUIRE(first.ensemble_covariance_stderr == other->ensemble_covariance_stderr);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        REQUIRE(first.binary_behavior.cell(i, j).p == other->binary_behavior.cell(i, j).p);
      }
    }
  }
}

TEST_CASE("config validation", "[hbt]") {
  HbtConfig config;
  config.n_events = 0;
  REQUIRE_THROWS_AS(hbt_run(config), std::invalid_argument);
  HbtConfig bad_settings;
  bad_settings.settings_a = {Setting(0.0)};
  REQUIRE_THROWS_AS(hbt_run(bad_settings), std::invalid_argument);
}
