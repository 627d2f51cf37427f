#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bell_lab/behavior.hpp"
#include "bell_lab/correlation.hpp"
#include "bell_lab/integrate.hpp"
#include "bell_lab/locality.hpp"
#include "bell_lab/models.hpp"
#include "bell_lab/polytope.hpp"

namespace bell_lab {

/// Classical intensity-correlation experiment, reduced to its logical core:
/// every emission event carries a single common phase theta, each detector
/// sees the deterministic intensity I = 1 + cos(theta + alpha), and binary
/// outcomes are a threshold cut on I. Ensemble intensity correlations are
/// nonzero purely because theta varies from event to event; at fixed theta
/// everything is deterministic and factorized.
struct HbtConfig {
  double alpha1 = 0.0;       // detector geometry phases, radians
  double alpha2 = 0.0;
  std::uint64_t n_events = 100000;
  std::uint64_t seed = 0;
  double threshold = 1.0;    // binary cut on intensity; 1.0 = mean intensity
  /// Settings of the binary-outcome behavior (must be 2 per wing).
  std::vector<Setting> settings_a = canonical_settings_a();
  std::vector<Setting> settings_b = canonical_settings_b();
  int workers = 1;

  void validate() const {
    if (n_events < 1) throw std::invalid_argument("hbt: n_events must be >= 1");
    if (settings_a.size() != 2 || settings_b.size() != 2) {
      throw std::invalid_argument("hbt: binary behavior needs 2x2 settings");
    }
  }
};

/// Detector intensity at common phase theta and geometry phase alpha,
/// I = 1 + cos(theta + alpha), in [0, 2].
inline double hbt_intensity(double theta, double alpha) {
  return 1.0 + std::cos(theta + alpha);
}

inline int hbt_binary_outcome(double theta, double alpha, double threshold) {
  return hbt_intensity(theta, alpha) >= threshold ? +1 : -1;
}

/// The experiment as a deterministic factorized model: hidden variable
/// theta ~ U[0, 2*pi), outcome +1 iff the local intensity reaches the
/// threshold. Both wings obey the same detector law.
inline LocalModel hbt_model(double threshold = 1.0) {
  auto strategy = [threshold](const Setting& alpha, const HiddenSample& h) {
    return hbt_binary_outcome(h.values[0], alpha.radians(), threshold);
  };
  return deterministic_lhv(strategy, strategy, uniform_angle_source(1), 1, true);
}

struct HbtReport {
  /// <I1 I2> - <I1><I2> over the event ensemble; converges to
  /// cos(alpha1 - alpha2)/2.
  double ensemble_covariance = 0.0;
  double ensemble_covariance_stderr = 0.0;
  /// Max |covariance| over repeated fixed-theta subsequences. Exactly zero:
  /// intensities are deterministic once theta is pinned.
  double fixed_h_covariance = 0.0;
  /// Empirical binary-outcome behavior over the configured settings, with
  /// every event evaluated at all four setting pairs.
  Behavior binary_behavior;
  ChshResult chsh_of_binary;
};

namespace detail {

/// Covariance of two equal-length sequences, shifted by their first elements
/// before accumulating. Constant sequences give exactly zero.
inline double shifted_covariance(const std::vector<double>& xs,
                                 const std::vector<double>& ys) {
  if (xs.empty() || xs.size() != ys.size()) {
    throw std::invalid_argument("shifted_covariance: bad input lengths");
  }
  const double x0 = xs.front();
  const double y0 = ys.front();
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - x0;
    const double dy = ys[i] - y0;
    sx += dx;
    sy += dy;
    sxy += dx * dy;
  }
  const double n = static_cast<double>(xs.size());
  return sxy / n - (sx / n) * (sy / n);
}

struct HbtMoments {
  double sx = 0.0, sy = 0.0, sxy = 0.0;
  std::array<std::array<std::array<std::uint64_t, 4>, 2>, 2> counts{};
};

}  // namespace detail

/// Runs the experiment: per event, theta is drawn uniformly on [0, 2*pi),
/// both intensities and all binary outcomes are evaluated, and the report
/// aggregates the ensemble covariance (with a delta-method standard error),
/// the fixed-theta covariance, and the binary behavior. Results depend only
/// on (config, seed), never on the worker count.
inline HbtReport hbt_run(const HbtConfig& config) {
  config.validate();
  const std::size_t n = static_cast<std::size_t>(config.n_events);

  // Pass 1: centered first moments and the behavior counts. The intensities
  // are accumulated centered at their known mean 1, i.e. x = cos(theta+alpha).
  std::vector<detail::HbtMoments> parts(kMonteCarloStreams);
  for_each_stream(n, config.seed, config.workers,
                  [&](std::size_t c, std::size_t count, RandomStream& rng) {
                    auto& m = parts[c];
                    for (std::size_t i = 0; i < count; ++i) {
                      const double theta = rng.uniform_angle();
                      const double x = std::cos(theta + config.alpha1);
                      const double y = std::cos(theta + config.alpha2);
                      m.sx += x;
                      m.sy += y;
                      m.sxy += x * y;
                      for (std::size_t ia = 0; ia < 2; ++ia) {
                        const int a = hbt_binary_outcome(
                            theta, config.settings_a[ia].radians(), config.threshold);
                        for (std::size_t ib = 0; ib < 2; ++ib) {
                          const int b = hbt_binary_outcome(
                              theta, config.settings_b[ib].radians(), config.threshold);
                          m.counts[ia][ib][OutcomeTable::index(a, b)] += 1;
                        }
                      }
                    }
                  });

  detail::HbtMoments total;
  for (const auto& m : parts) {
    total.sx += m.sx;
    total.sy += m.sy;
    total.sxy += m.sxy;
    for (std::size_t ia = 0; ia < 2; ++ia) {
      for (std::size_t ib = 0; ib < 2; ++ib) {
        for (std::size_t o = 0; o < 4; ++o) {
          total.counts[ia][ib][o] += m.counts[ia][ib][o];
        }
      }
    }
  }
  const double dn = static_cast<double>(n);
  const double mean_x = total.sx / dn;
  const double mean_y = total.sy / dn;
  const double covariance = total.sxy / dn - mean_x * mean_y;

  // Pass 2 (same substream seeds, hence the same thetas): influence-function
  // standard error of the covariance estimator.
  std::vector<double> psi_sq(kMonteCarloStreams, 0.0);
  for_each_stream(n, config.seed, config.workers,
                  [&](std::size_t c, std::size_t count, RandomStream& rng) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < count; ++i) {
                      const double theta = rng.uniform_angle();
                      const double x = std::cos(theta + config.alpha1);
                      const double y = std::cos(theta + config.alpha2);
                      const double psi = (x - mean_x) * (y - mean_y) - covariance;
                      acc += psi * psi;
                    }
                    psi_sq[c] = acc;
                  });
  double sum_psi_sq = 0.0;
  for (double v : psi_sq) sum_psi_sq += v;
  const double stderr_cov =
      n > 1 ? std::sqrt(sum_psi_sq / (dn * (dn - 1.0))) : 0.0;

  // Fixed-theta subsequences: repeat a handful of pinned phases; the
  // intensities are then constant, so each covariance is exactly zero.
  double fixed_h = 0.0;
  {
    RandomStream probe(derive_stream_seed(config.seed, 0));
    const std::array<double, 3> pinned = {probe.uniform_angle(), 0.0, kPi / 3.0};
    const std::size_t repeats = 256;
    std::vector<double> i1(repeats), i2(repeats);
    for (double theta : pinned) {
      for (std::size_t r = 0; r < repeats; ++r) {
        i1[r] = hbt_intensity(theta, config.alpha1);
        i2[r] = hbt_intensity(theta, config.alpha2);
      }
      fixed_h = std::max(fixed_h, std::fabs(detail::shifted_covariance(i1, i2)));
    }
  }

  HbtReport report;
  report.ensemble_covariance = covariance;
  report.ensemble_covariance_stderr = stderr_cov;
  report.fixed_h_covariance = fixed_h;
  report.binary_behavior = make_behavior(config.settings_a, config.settings_b);
  for (std::size_t ia = 0; ia < 2; ++ia) {
    for (std::size_t ib = 0; ib < 2; ++ib) {
      OutcomeTable t;
      for (std::size_t o = 0; o < 4; ++o) {
        t.p[o] = static_cast<double>(total.counts[ia][ib][o]) / dn;
      }
      report.binary_behavior.cell(ia, ib) = t;
    }
  }
  validate_behavior(report.binary_behavior);
  report.chsh_of_binary = chsh_from_behavior(report.binary_behavior);
  return report;
}

/// The run's locality verdicts in one record: the empirical binary behavior
/// is inside the local polytope (each event contributes one deterministic
/// strategy, so the behavior is a vertex mixture), while the ensemble
/// intensity covariance stays nonzero for cos(alpha1 - alpha2) != 0.
struct HbtAudit {
  LocalityReport condition_c;
  MembershipVerdict membership;
  ChshResult chsh_of_binary;
  double ensemble_covariance = 0.0;
  double ensemble_covariance_stderr = 0.0;
  double fixed_h_covariance = 0.0;
};

inline HbtAudit hbt_locality_audit(const HbtConfig& config) {
  config.validate();
  const HbtReport report = hbt_run(config);
  HbtAudit audit;
  const JointModel joint = as_joint(hbt_model(config.threshold));
  audit.condition_c = check_condition_c(joint, default_check_grid(joint));
  audit.membership = membership(report.binary_behavior);
  audit.chsh_of_binary = report.chsh_of_binary;
  audit.ensemble_covariance = report.ensemble_covariance;
  audit.ensemble_covariance_stderr = report.ensemble_covariance_stderr;
  audit.fixed_h_covariance = report.fixed_h_covariance;
  return audit;
}

}  // namespace bell_lab
