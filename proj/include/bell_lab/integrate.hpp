#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "bell_lab/behavior.hpp"
#include "bell_lab/model.hpp"
#include "bell_lab/rng.hpp"

namespace bell_lab {

enum class IntegrationMethod { quadrature, monte_carlo };

/// How to average over the hidden variables.
///
/// Quadrature uses a composite midpoint rule over [0, 2*pi)^dim, which is
/// spectrally accurate for periodic integrands; it requires
/// periodic_uniform_hidden and hidden_dim <= 2. Monte Carlo draws from the
/// model's source sampler.
struct IntegrationSpec {
  IntegrationMethod method = IntegrationMethod::quadrature;
  std::size_t n = 4096;      // quadrature node budget, or Monte Carlo samples
  std::uint64_t seed = 0;    // Monte Carlo only
  int workers = 1;
};

struct Estimate {
  double value = 0.0;
  std::optional<double> std_error;  // set for Monte Carlo estimates
};

/// Raised when an averaged probability table breaks normalization, which
/// signals a broken model rather than an integration artifact.
struct integration_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Number of fixed RNG substreams for Monte Carlo work. Samples are
/// partitioned over these streams by index, and partial sums are combined in
/// ascending stream order, so a result depends only on (seed, n) -- never on
/// the worker count.
inline constexpr std::size_t kMonteCarloStreams = 64;

/// Calls fn(stream_index, samples_in_stream, rng) for every substream,
/// optionally across `workers` threads. fn must only touch per-stream state.
template <typename Fn>
void for_each_stream(std::size_t n, std::uint64_t seed, int workers, Fn&& fn) {
  const std::size_t streams = kMonteCarloStreams;
  auto stream_begin = [&](std::size_t c) { return (n * c) / streams; };

  auto run_stream = [&](std::size_t c) {
    std::size_t count = stream_begin(c + 1) - stream_begin(c);
    RandomStream rng(derive_stream_seed(seed, c));
    fn(c, count, rng);
  };

  int w = std::clamp(workers, 1, static_cast<int>(streams));
  if (w <= 1) {
    for (std::size_t c = 0; c < streams; ++c) run_stream(c);
    return;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(w));
  pool.reserve(static_cast<std::size_t>(w));
  for (int t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t c = static_cast<std::size_t>(t); c < streams;
             c += static_cast<std::size_t>(w)) {
          run_stream(c);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(t)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace detail {

template <std::size_t K>
struct StreamMoments {
  double weight = 0.0;
  double weight_sq = 0.0;
  std::array<double, K> wf{};
  std::array<double, K> wf2{};
};

}  // namespace detail

/// Mean of f(h) over the hidden-variable distribution. f returns K values that
/// are averaged over the same samples (so any linear identity among the
/// components survives averaging, up to rounding).
template <std::size_t K, typename F>
std::array<Estimate, K> average_over_hidden(int hidden_dim, bool periodic_uniform,
                                            const SourceSampler& sampler,
                                            const IntegrationSpec& spec, F&& f) {
  if (spec.n < 1) throw std::invalid_argument("integration: n must be >= 1");
  std::array<Estimate, K> out{};

  if (hidden_dim == 0) {
    HiddenSample h;
    auto v = f(h);
    for (std::size_t k = 0; k < K; ++k) out[k].value = v[k];
    return out;
  }

  if (spec.method == IntegrationMethod::quadrature) {
    if (!periodic_uniform) {
      throw std::invalid_argument(
          "quadrature requires hidden variables uniform on [0,2pi)^dim");
    }
    if (hidden_dim > 2) {
      throw std::invalid_argument("quadrature supports hidden_dim <= 2 only");
    }
    std::array<double, K> sums{};
    std::size_t total = 0;
    if (hidden_dim == 1) {
      const std::size_t m = spec.n;
      HiddenSample h;
      h.values.resize(1);
      for (std::size_t i = 0; i < m; ++i) {
        h.values[0] = (static_cast<double>(i) + 0.5) * kTwoPi / static_cast<double>(m);
        auto v = f(h);
        for (std::size_t k = 0; k < K; ++k) sums[k] += v[k];
      }
      total = m;
    } else {
      const std::size_t m = std::max<std::size_t>(
          1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(spec.n)))));
      HiddenSample h;
      h.values.resize(2);
      for (std::size_t i = 0; i < m; ++i) {
        h.values[0] = (static_cast<double>(i) + 0.5) * kTwoPi / static_cast<double>(m);
        for (std::size_t j = 0; j < m; ++j) {
          h.values[1] = (static_cast<double>(j) + 0.5) * kTwoPi / static_cast<double>(m);
          auto v = f(h);
          for (std::size_t k = 0; k < K; ++k) sums[k] += v[k];
        }
      }
      total = m * m;
    }
    for (std::size_t k = 0; k < K; ++k) {
      out[k].value = sums[k] / static_cast<double>(total);
    }
    return out;
  }

  // Monte Carlo with fixed substreams.
  if (!sampler) throw std::invalid_argument("model has no source sampler");
  std::vector<detail::StreamMoments<K>> parts(kMonteCarloStreams);
  for_each_stream(spec.n, spec.seed, spec.workers,
                  [&](std::size_t c, std::size_t count, RandomStream& rng) {
                    auto& m = parts[c];
                    for (std::size_t i = 0; i < count; ++i) {
                      HiddenSample h = sampler(rng);
                      if (h.weight < 0.0) {
                        throw std::domain_error("hidden sample weight must be >= 0");
                      }
                      auto v = f(h);
                      m.weight += h.weight;
                      m.weight_sq += h.weight * h.weight;
                      for (std::size_t k = 0; k < K; ++k) {
                        m.wf[k] += h.weight * v[k];
                        m.wf2[k] += h.weight * v[k] * v[k];
                      }
                    }
                  });

  detail::StreamMoments<K> total;
  for (const auto& m : parts) {
    total.weight += m.weight;
    total.weight_sq += m.weight_sq;
    for (std::size_t k = 0; k < K; ++k) {
      total.wf[k] += m.wf[k];
      total.wf2[k] += m.wf2[k];
    }
  }
  if (total.weight <= 0.0) {
    throw std::domain_error("Monte Carlo: total sample weight is zero");
  }
  const double n_eff = total.weight * total.weight / total.weight_sq;
  for (std::size_t k = 0; k < K; ++k) {
    const double mean = total.wf[k] / total.weight;
    out[k].value = mean;
    double var = total.wf2[k] / total.weight - mean * mean;
    if (var < 0.0) var = 0.0;
    out[k].std_error = n_eff > 1.0 ? std::sqrt(var / (n_eff - 1.0)) : 0.0;
  }
  return out;
}

/// Averages the conditional outcome tables of `model` over its hidden
/// variables, one cell per setting pair. Throws integration_error if a cell
/// breaks normalization beyond 1e-9.
inline Behavior behavior_from_model(const JointModel& model,
                                    const std::vector<Setting>& settings_a,
                                    const std::vector<Setting>& settings_b,
                                    const IntegrationSpec& spec) {
  if (settings_a.empty() || settings_b.empty()) {
    throw std::invalid_argument("behavior_from_model: empty setting list");
  }
  Behavior behavior = make_behavior(settings_a, settings_b);
  for (std::size_t i = 0; i < behavior.n_a(); ++i) {
    for (std::size_t j = 0; j < behavior.n_b(); ++j) {
      auto cell = average_over_hidden<4>(
          model.hidden_dim, model.periodic_uniform_hidden, model.source_sampler, spec,
          [&](const HiddenSample& h) {
            return checked_joint(model, settings_a[i], settings_b[j], h).p;
          });
      OutcomeTable t;
      for (std::size_t k = 0; k < 4; ++k) t.p[k] = cell[k].value;
      if (std::fabs(t.sum() - 1.0) > 1e-9) {
        throw integration_error("behavior_from_model: cell normalization violated");
      }
      for (double& v : t.p) {
        if (v < 0.0) {
          if (v < -1e-12) throw integration_error("behavior_from_model: negative cell");
          v = 0.0;
        }
      }
      behavior.cell(i, j) = t;
    }
  }
  return behavior;
}

inline Behavior behavior_from_model(const LocalModel& model,
                                    const std::vector<Setting>& settings_a,
                                    const std::vector<Setting>& settings_b,
                                    const IntegrationSpec& spec) {
  return behavior_from_model(as_joint(model), settings_a, settings_b, spec);
}

}  // namespace bell_lab
