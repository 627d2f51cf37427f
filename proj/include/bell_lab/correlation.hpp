#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bell_lab/behavior.hpp"
#include "bell_lab/integrate.hpp"
#include "bell_lab/model.hpp"

namespace bell_lab {

/// E(a,b) for a factorized model: the hidden-variable average of
/// [2 pA(a,h) - 1][2 pB(b,h) - 1], which reduces to the average outcome
/// product when the responses are deterministic.
inline Estimate correlation_local(const LocalModel& model, const Setting& a,
                                const Setting& b, const IntegrationSpec& spec) {
  auto r = average_over_hidden<1>(
      model.hidden_dim, model.periodic_uniform_hidden, model.source_sampler, spec,
      [&](const HiddenSample& h) {
        const double pa = checked_response(model.response_a(a, h), "A");
        const double pb = checked_response(model.response_b(b, h), "B");
        return std::array<double, 1>{(2.0 * pa - 1.0) * (2.0 * pb - 1.0)};
      });
  return r[0];
}

/// E(a,b) for a general joint model: the hidden-variable average of the
/// conditional table's correlator.
inline Estimate correlation_joint(const JointModel& model, const Setting& a,
                                  const Setting& b, const IntegrationSpec& spec) {
  auto r = average_over_hidden<1>(
      model.hidden_dim, model.periodic_uniform_hidden, model.source_sampler, spec,
      [&](const HiddenSample& h) {
        return std::array<double, 1>{checked_joint(model, a, b, h).correlator()};
      });
  return r[0];
}

// ---------------------------------------------------------------------------
// CHSH
// ---------------------------------------------------------------------------

struct ChshSettings {
  Setting a, a_prime, b, b_prime;
};

/// S = E(a,b) + E(a,b') + E(a',b) - E(a',b'); the standard error propagates
/// in quadrature from per-correlator errors when those are available.
struct ChshResult {
  ChshSettings settings;
  std::array<Estimate, 4> correlators;  // E(a,b), E(a,b'), E(a',b), E(a',b')
  double s_value = 0.0;
  std::optional<double> estimator_stderr;

  double abs_s() const { return std::fabs(s_value); }
};

inline ChshResult chsh_from_correlators(const ChshSettings& settings,
                                        const std::array<Estimate, 4>& correlators) {
  ChshResult r;
  r.settings = settings;
  r.correlators = correlators;
  r.s_value = correlators[0].value + correlators[1].value + correlators[2].value -
              correlators[3].value;
  double var = 0.0;
  bool any = false;
  for (const Estimate& e : correlators) {
    if (e.std_error) {
      var += *e.std_error * *e.std_error;
      any = true;
    }
  }
  if (any) r.estimator_stderr = std::sqrt(var);
  return r;
}

inline ChshResult chsh(const LocalModel& model, const ChshSettings& s,
                       const IntegrationSpec& spec) {
  return chsh_from_correlators(
      s, {correlation_local(model, s.a, s.b, spec), correlation_local(model, s.a, s.b_prime, spec),
          correlation_local(model, s.a_prime, s.b, spec),
          correlation_local(model, s.a_prime, s.b_prime, spec)});
}

inline ChshResult chsh(const JointModel& model, const ChshSettings& s,
                       const IntegrationSpec& spec) {
  return chsh_from_correlators(
      s, {correlation_joint(model, s.a, s.b, spec),
          correlation_joint(model, s.a, s.b_prime, spec),
          correlation_joint(model, s.a_prime, s.b, spec),
          correlation_joint(model, s.a_prime, s.b_prime, spec)});
}

/// CHSH of a 2x2 behavior at its own settings.
inline ChshResult chsh_from_behavior(const Behavior& behavior) {
  if (!behavior.is_two_by_two()) {
    throw std::invalid_argument("chsh_from_behavior requires a 2x2 behavior");
  }
  ChshSettings s{behavior.settings_a[0], behavior.settings_a[1], behavior.settings_b[0],
                 behavior.settings_b[1]};
  return chsh_from_correlators(
      s, {Estimate{behavior.cell(0, 0).correlator(), std::nullopt},
          Estimate{behavior.cell(0, 1).correlator(), std::nullopt},
          Estimate{behavior.cell(1, 0).correlator(), std::nullopt},
          Estimate{behavior.cell(1, 1).correlator(), std::nullopt}});
}

// ---------------------------------------------------------------------------
// CHSH maximization over settings
// ---------------------------------------------------------------------------

using CorrelatorFn = std::function<double(const Setting&, const Setting&)>;

inline CorrelatorFn correlator_fn(const LocalModel& model, IntegrationSpec spec) {
  return [model, spec](const Setting& a, const Setting& b) {
    return correlation_local(model, a, b, spec).value;
  };
}

inline CorrelatorFn correlator_fn(const JointModel& model, IntegrationSpec spec) {
  return [model, spec](const Setting& a, const Setting& b) {
    return correlation_joint(model, a, b, spec).value;
  };
}

struct ChshSearchSpec {
  int grid_n = 16;        // coarse grid points per angle, >= 8
  int refine_iters = 3;   // coordinate-descent sweeps with step halving
};

/// Maximizes |S| over the four settings: exhaustive search on a grid_n^4
/// grid (wing-A and wing-B angles share the grid), then coordinate descent
/// with the step halved after each sweep. Only strict improvements are
/// accepted, so the best |S| is nondecreasing across iterations.
inline ChshResult maximize_chsh_over_settings(const CorrelatorFn& correlator,
                                              const ChshSearchSpec& search = {}) {
  if (search.grid_n < 8) {
    throw std::invalid_argument("maximize_chsh_over_settings: grid_n must be >= 8");
  }
  const int n = search.grid_n;
  std::vector<Setting> grid;
  grid.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    grid.emplace_back(kTwoPi * static_cast<double>(k) / static_cast<double>(n));
  }
  // Correlator table over all (wing-A grid point, wing-B grid point) pairs.
  std::vector<std::vector<double>> table(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          correlator(grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(j)]);
    }
  }

  double best_abs = -1.0;
  std::array<int, 4> best_idx{0, 0, 0, 0};  // (a, a', b, b')
  for (int ia = 0; ia < n; ++ia) {
    for (int iap = 0; iap < n; ++iap) {
      for (int ib = 0; ib < n; ++ib) {
        const double e_ab = table[ia][ib];
        const double e_apb = table[iap][ib];
        for (int ibp = 0; ibp < n; ++ibp) {
          const double s = e_ab + table[ia][ibp] + e_apb - table[iap][ibp];
          const double abs_s = std::fabs(s);
          if (abs_s > best_abs) {
            best_abs = abs_s;
            best_idx = {ia, iap, ib, ibp};
          }
        }
      }
    }
  }

  std::array<double, 4> angles{grid[best_idx[0]].radians(), grid[best_idx[1]].radians(),
                               grid[best_idx[2]].radians(), grid[best_idx[3]].radians()};
  auto evaluate = [&](const std::array<double, 4>& q) {
    ChshSettings s{Setting(q[0]), Setting(q[1]), Setting(q[2]), Setting(q[3])};
    return chsh_from_correlators(
        s, {Estimate{correlator(s.a, s.b), std::nullopt},
            Estimate{correlator(s.a, s.b_prime), std::nullopt},
            Estimate{correlator(s.a_prime, s.b), std::nullopt},
            Estimate{correlator(s.a_prime, s.b_prime), std::nullopt}});
  };

  ChshResult best = evaluate(angles);
  double step = kTwoPi / static_cast<double>(n);
  for (int iter = 0; iter < search.refine_iters; ++iter) {
    for (std::size_t coord = 0; coord < 4; ++coord) {
      for (double delta : {step, -step}) {
        std::array<double, 4> candidate = angles;
        candidate[coord] += delta;
        ChshResult r = evaluate(candidate);
        if (r.abs_s() > best.abs_s()) {
          best = r;
          angles = candidate;
        }
      }
    }
    step *= 0.5;
  }
  return best;
}

// ---------------------------------------------------------------------------
// Empirical estimation from event streams
// ---------------------------------------------------------------------------

struct Event {
  int a_index = 0;
  int b_index = 0;
  int outcome_a = +1;
  int outcome_b = +1;
};

struct missing_pairs_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Per-pair sample means of the outcome product with standard errors
/// (sample standard deviation / sqrt(n)). Throws missing_pairs_error naming
/// every requested pair that received no events.
inline std::vector<std::vector<Estimate>> empirical_correlations(
    std::span<const Event> events, std::size_t n_a, std::size_t n_b) {
  if (n_a == 0 || n_b == 0) {
    throw std::invalid_argument("empirical_correlations: empty pair grid");
  }
  std::vector<std::vector<std::uint64_t>> count(n_a, std::vector<std::uint64_t>(n_b, 0));
  std::vector<std::vector<double>> sum(n_a, std::vector<double>(n_b, 0.0));
  for (const Event& e : events) {
    if (e.a_index < 0 || static_cast<std::size_t>(e.a_index) >= n_a || e.b_index < 0 ||
        static_cast<std::size_t>(e.b_index) >= n_b) {
      throw std::invalid_argument("event setting index out of range");
    }
    if ((e.outcome_a != 1 && e.outcome_a != -1) || (e.outcome_b != 1 && e.outcome_b != -1)) {
      throw std::invalid_argument("event outcome outside {+1,-1}");
    }
    count[e.a_index][e.b_index] += 1;
    sum[e.a_index][e.b_index] += static_cast<double>(e.outcome_a * e.outcome_b);
  }
  std::string missing;
  for (std::size_t i = 0; i < n_a; ++i) {
    for (std::size_t j = 0; j < n_b; ++j) {
      if (count[i][j] == 0) {
        if (!missing.empty()) missing += ", ";
        missing += "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      }
    }
  }
  if (!missing.empty()) {
    throw missing_pairs_error("no events for setting pairs: " + missing);
  }
  std::vector<std::vector<Estimate>> out(n_a, std::vector<Estimate>(n_b));
  for (std::size_t i = 0; i < n_a; ++i) {
    for (std::size_t j = 0; j < n_b; ++j) {
      const double n = static_cast<double>(count[i][j]);
      const double mean = sum[i][j] / n;
      // Products are +-1, so the sample variance has the closed form
      // (1 - mean^2) * n / (n - 1).
      double var = n > 1.0 ? (1.0 - mean * mean) * n / (n - 1.0) : 0.0;
      if (var < 0.0) var = 0.0;
      out[i][j] = Estimate{mean, std::sqrt(var / n)};
    }
  }
  return out;
}

/// Simulates `events_per_pair` detection events for every setting pair by
/// sampling h from the source and then the outcome pair from the conditional
/// table. Pair (i,j) uses substream i*n_b+j of `seed`.
inline std::vector<Event> simulate_events(const JointModel& model,
                                          const std::vector<Setting>& settings_a,
                                          const std::vector<Setting>& settings_b,
                                          std::size_t events_per_pair,
                                          std::uint64_t seed) {
  if (settings_a.empty() || settings_b.empty()) {
    throw std::invalid_argument("simulate_events: empty setting list");
  }
  if (events_per_pair == 0) {
    throw std::invalid_argument("simulate_events: events_per_pair must be >= 1");
  }
  std::vector<Event> events;
  events.reserve(settings_a.size() * settings_b.size() * events_per_pair);
  static constexpr std::array<std::pair<int, int>, 4> kOutcomes = {
      std::pair<int, int>{+1, +1}, {+1, -1}, {-1, +1}, {-1, -1}};
  for (std::size_t i = 0; i < settings_a.size(); ++i) {
    for (std::size_t j = 0; j < settings_b.size(); ++j) {
      RandomStream rng(derive_stream_seed(seed, i * settings_b.size() + j));
      for (std::size_t e = 0; e < events_per_pair; ++e) {
        HiddenSample h = model.source_sampler(rng);
        const OutcomeTable t = checked_joint(model, settings_a[i], settings_b[j], h);
        const double u = rng.uniform01();
        double acc = 0.0;
        std::size_t pick = 3;
        for (std::size_t k = 0; k < 4; ++k) {
          acc += t.p[k];
          if (u < acc) {
            pick = k;
            break;
          }
        }
        events.push_back(Event{static_cast<int>(i), static_cast<int>(j),
                               kOutcomes[pick].first, kOutcomes[pick].second});
      }
    }
  }
  return events;
}

/// Reads an event stream in the CSV layout
///   a_index,b_index,outcome_a,outcome_b
/// with outcomes written as +1 / -1.
inline std::vector<Event> read_events_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("event CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "a_index,b_index,outcome_a,outcome_b") {
    throw std::invalid_argument("event CSV: unexpected header: " + line);
  }
  std::vector<Event> events;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::array<long, 4> v{};
    for (std::size_t k = 0; k < 4; ++k) {
      if (!std::getline(row, field, ',')) {
        throw std::invalid_argument("event CSV: short row at line " +
                                    std::to_string(line_no));
      }
      try {
        v[k] = std::stol(field);
      } catch (const std::exception&) {
        throw std::invalid_argument("event CSV: bad integer at line " +
                                    std::to_string(line_no));
      }
    }
    events.push_back(Event{static_cast<int>(v[0]), static_cast<int>(v[1]),
                           static_cast<int>(v[2]), static_cast<int>(v[3])});
  }
  return events;
}

inline std::string write_events_csv(std::span<const Event> events) {
  std::string out = "a_index,b_index,outcome_a,outcome_b\n";
  for (const Event& e : events) {
    out += std::to_string(e.a_index) + "," + std::to_string(e.b_index) + "," +
           (e.outcome_a > 0 ? "+1" : "-1") + "," + (e.outcome_b > 0 ? "+1" : "-1") + "\n";
  }
  return out;
}

}  // namespace bell_lab
