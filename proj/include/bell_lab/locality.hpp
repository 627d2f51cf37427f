#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bell_lab/behavior.hpp"
#include "bell_lab/model.hpp"
#include "bell_lab/rng.hpp"

namespace bell_lab {

/// Conditioning outcomes with probability below this cutoff are skipped in
/// the outcome-independence check (the conditional is undefined there).
inline constexpr double kConditioningCutoff = 1e-12;

inline constexpr std::uint64_t kDefaultGridSeed = 12345;

/// Where a check attained its maximum residual: named angles/indices plus
/// the hidden sample, with string tags (e.g. which wing).
struct WorstCase {
  std::vector<std::pair<std::string, std::string>> tags;
  std::vector<std::pair<std::string, double>> coords;
  std::vector<double> hidden;
};

struct LocalityReport {
  std::string check_name;  // condition-c | parameter-independence |
                           // outcome-independence | no-signaling
  bool pass = true;
  double max_residual = 0.0;
  double tolerance = kDefaultTol;
  WorstCase worst_case;
  std::string grid_spec;
};

/// Evaluation grid for the model-level checks: setting points per wing and a
/// list of hidden samples at which conditionals are interrogated.
struct CheckGrid {
  std::vector<Setting> settings_a;
  std::vector<Setting> settings_b;
  std::vector<HiddenSample> hidden;
  std::string spec;
};

/// n_settings evenly spaced angles per wing, n_hidden samples drawn from the
/// model's source with a fixed derived seed (a single empty sample when
/// hidden_dim = 0).
inline CheckGrid default_check_grid(const JointModel& model, int n_settings = 24,
                                    int n_hidden = 32,
                                    std::uint64_t seed = kDefaultGridSeed) {
  if (n_settings < 1 || n_hidden < 1) {
    throw std::invalid_argument("check grid: sizes must be >= 1");
  }
  CheckGrid grid;
  grid.settings_a.reserve(static_cast<std::size_t>(n_settings));
  for (int k = 0; k < n_settings; ++k) {
    grid.settings_a.emplace_back(kTwoPi * static_cast<double>(k) /
                                 static_cast<double>(n_settings));
  }
  grid.settings_b = grid.settings_a;
  if (model.hidden_dim == 0) {
    grid.hidden.push_back(HiddenSample{});
    grid.spec = "settings " + std::to_string(n_settings) + "x" +
                std::to_string(n_settings) + " uniform [0,2pi); hidden: point source";
    return grid;
  }
  RandomStream rng(derive_stream_seed(seed, 0));
  grid.hidden.reserve(static_cast<std::size_t>(n_hidden));
  for (int k = 0; k < n_hidden; ++k) grid.hidden.push_back(model.source_sampler(rng));
  grid.spec = "settings " + std::to_string(n_settings) + "x" +
              std::to_string(n_settings) + " uniform [0,2pi); hidden " +
              std::to_string(n_hidden) + " samples (seed " + std::to_string(seed) + ")";
  return grid;
}

namespace detail {

struct ResidualTracker {
  double max_residual = -1.0;
  WorstCase worst;

  void offer(double residual, WorstCase worst_case) {
    if (residual > max_residual) {
      max_residual = residual;
      worst = std::move(worst_case);
    }
  }

  LocalityReport report(std::string check_name, double tol, std::string grid_spec) const {
    LocalityReport r;
    r.check_name = std::move(check_name);
    r.max_residual = max_residual < 0.0 ? 0.0 : max_residual;
    r.tolerance = tol;
    r.pass = r.max_residual <= tol;
    r.worst_case = worst;
    r.grid_spec = std::move(grid_spec);
    return r;
  }
};

}  // namespace detail

/// Factorization at fixed hidden variables: compares p(A,B|a,b,h) against the
/// product of its own conditional marginals, maximized over the grid. Zero
/// residual means outcome correlations vanish once the common causes are
/// pinned; correlations then arise only from varying h.
inline LocalityReport check_condition_c(const JointModel& model, const CheckGrid& grid,
                                        double tol = kDefaultTol) {
  if (grid.settings_a.empty() || grid.settings_b.empty() || grid.hidden.empty()) {
    throw std::invalid_argument("check grid must be nonempty");
  }
  detail::ResidualTracker tracker;
  for (const Setting& a : grid.settings_a) {
    for (const Setting& b : grid.settings_b) {
      for (const HiddenSample& h : grid.hidden) {
        const OutcomeTable t = checked_joint(model, a, b, h);
        for (int A : {+1, -1}) {
          for (int B : {+1, -1}) {
            const double residual =
                std::fabs(t(A, B) - t.marginal_a(A) * t.marginal_b(B));
            if (residual > tracker.max_residual) {
              WorstCase w;
              w.coords = {{"a", a.radians()},
                          {"b", b.radians()},
                          {"outcome_a", static_cast<double>(A)},
                          {"outcome_b", static_cast<double>(B)}};
              w.hidden = h.values;
              tracker.offer(residual, std::move(w));
            }
          }
        }
      }
    }
  }
  return tracker.report("condition-c", tol, grid.spec);
}

/// Remote-setting independence of each wing's marginal at fixed h:
/// max over b, b' of |p(A|a,b,h) - p(A|a,b',h)| and the mirror-image
/// comparison on wing B.
inline LocalityReport check_parameter_independence(const JointModel& model,
                                                   const CheckGrid& grid,
                                                   double tol = kDefaultTol) {
  if (grid.settings_a.empty() || grid.settings_b.empty() || grid.hidden.empty()) {
    throw std::invalid_argument("check grid must be nonempty");
  }
  detail::ResidualTracker tracker;
  std::vector<double> marginals;
  for (const HiddenSample& h : grid.hidden) {
    // Wing A: scan remote settings b at each fixed a.
    for (const Setting& a : grid.settings_a) {
      marginals.clear();
      for (const Setting& b : grid.settings_b) {
        marginals.push_back(checked_joint(model, a, b, h).marginal_a(+1));
      }
      std::size_t lo = 0, hi = 0;
      for (std::size_t j = 1; j < marginals.size(); ++j) {
        if (marginals[j] < marginals[lo]) lo = j;
        if (marginals[j] > marginals[hi]) hi = j;
      }
      const double residual = marginals[hi] - marginals[lo];
      if (residual > tracker.max_residual) {
        WorstCase w;
        w.tags = {{"wing", "A"}};
        w.coords = {{"a", a.radians()},
                    {"b", grid.settings_b[hi].radians()},
                    {"b_prime", grid.settings_b[lo].radians()}};
        w.hidden = h.values;
        tracker.offer(residual, std::move(w));
      }
    }
    // Wing B: scan remote settings a at each fixed b.
    for (const Setting& b : grid.settings_b) {
      marginals.clear();
      for (const Setting& a : grid.settings_a) {
        marginals.push_back(checked_joint(model, a, b, h).marginal_b(+1));
      }
      std::size_t lo = 0, hi = 0;
      for (std::size_t i = 1; i < marginals.size(); ++i) {
        if (marginals[i] < marginals[lo]) lo = i;
        if (marginals[i] > marginals[hi]) hi = i;
      }
      const double residual = marginals[hi] - marginals[lo];
      if (residual > tracker.max_residual) {
        WorstCase w;
        w.tags = {{"wing", "B"}};
        w.coords = {{"b", b.radians()},
                    {"a", grid.settings_a[hi].radians()},
                    {"a_prime", grid.settings_a[lo].radians()}};
        w.hidden = h.values;
        tracker.offer(residual, std::move(w));
      }
    }
  }
  return tracker.report("parameter-independence", tol, grid.spec);
}

/// Remote-outcome independence at fixed settings and h: compares
/// p(A|a,b,B=+,h) with p(A|a,b,B=-,h) (and the wing-B mirror image).
/// Conditioning outcomes of probability below kConditioningCutoff are
/// skipped.
inline LocalityReport check_outcome_independence(const JointModel& model,
                                                 const CheckGrid& grid,
                                                 double tol = kDefaultTol) {
  if (grid.settings_a.empty() || grid.settings_b.empty() || grid.hidden.empty()) {
    throw std::invalid_argument("check grid must be nonempty");
  }
  detail::ResidualTracker tracker;
  for (const Setting& a : grid.settings_a) {
    for (const Setting& b : grid.settings_b) {
      for (const HiddenSample& h : grid.hidden) {
        const OutcomeTable t = checked_joint(model, a, b, h);
        const double pb_plus = t.marginal_b(+1);
        const double pb_minus = t.marginal_b(-1);
        if (pb_plus >= kConditioningCutoff && pb_minus >= kConditioningCutoff) {
          const double residual =
              std::fabs(t(+1, +1) / pb_plus - t(+1, -1) / pb_minus);
          if (residual > tracker.max_residual) {
            WorstCase w;
            w.tags = {{"wing", "A"}, {"conditioned_on", "B"}};
            w.coords = {{"a", a.radians()}, {"b", b.radians()}};
            w.hidden = h.values;
            tracker.offer(residual, std::move(w));
          }
        }
        const double pa_plus = t.marginal_a(+1);
        const double pa_minus = t.marginal_a(-1);
        if (pa_plus >= kConditioningCutoff && pa_minus >= kConditioningCutoff) {
          const double residual =
              std::fabs(t(+1, +1) / pa_plus - t(-1, +1) / pa_minus);
          if (residual > tracker.max_residual) {
            WorstCase w;
            w.tags = {{"wing", "B"}, {"conditioned_on", "A"}};
            w.coords = {{"a", a.radians()}, {"b", b.radians()}};
            w.hidden = h.values;
            tracker.offer(residual, std::move(w));
          }
        }
      }
    }
  }
  return tracker.report("outcome-independence", tol, grid.spec);
}

/// Observable-level signaling test on a behavior: each wing's marginal must
/// not depend on the remote setting choice.
inline LocalityReport no_signaling_check(const Behavior& behavior,
                                         double tol = kDefaultTol) {
  validate_behavior(behavior);
  detail::ResidualTracker tracker;
  for (std::size_t i = 0; i < behavior.n_a(); ++i) {
    for (std::size_t j = 0; j < behavior.n_b(); ++j) {
      for (std::size_t jp = j + 1; jp < behavior.n_b(); ++jp) {
        const double residual = std::fabs(behavior.cell(i, j).marginal_a(+1) -
                                          behavior.cell(i, jp).marginal_a(+1));
        if (residual > tracker.max_residual) {
          WorstCase w;
          w.tags = {{"wing", "A"}};
          w.coords = {{"a_index", static_cast<double>(i)},
                      {"b_index", static_cast<double>(j)},
                      {"b_prime_index", static_cast<double>(jp)}};
          tracker.offer(residual, std::move(w));
        }
      }
    }
  }
  for (std::size_t j = 0; j < behavior.n_b(); ++j) {
    for (std::size_t i = 0; i < behavior.n_a(); ++i) {
      for (std::size_t ip = i + 1; ip < behavior.n_a(); ++ip) {
        const double residual = std::fabs(behavior.cell(i, j).marginal_b(+1) -
                                          behavior.cell(ip, j).marginal_b(+1));
        if (residual > tracker.max_residual) {
          WorstCase w;
          w.tags = {{"wing", "B"}};
          w.coords = {{"b_index", static_cast<double>(j)},
                      {"a_index", static_cast<double>(i)},
                      {"a_prime_index", static_cast<double>(ip)}};
          tracker.offer(residual, std::move(w));
        }
      }
    }
  }
  std::string spec = "behavior " + std::to_string(behavior.n_a()) + "x" +
                     std::to_string(behavior.n_b()) + " settings";
  return tracker.report("no-signaling", tol, std::move(spec));
}

}  // namespace bell_lab
