#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "bell_lab/behavior.hpp"
#include "bell_lab/model.hpp"

namespace bell_lab {

/// Deterministic per-wing strategy: outcome (+1 or -1) as a function of the
/// local setting and the hidden parameters.
using Strategy = std::function<int(const Setting&, const HiddenSample&)>;

/// Uniform angle source on [0, 2*pi)^dim.
inline SourceSampler uniform_angle_source(int dim) {
  return [dim](RandomStream& rng) {
    HiddenSample h;
    h.values.reserve(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) h.values.push_back(rng.uniform_angle());
    return h;
  };
}

namespace detail {

inline int checked_outcome(int value, const char* wing) {
  if (value != 1 && value != -1) {
    throw std::invalid_argument(std::string("strategy on wing ") + wing +
                                " returned a value outside {+1,-1}");
  }
  return value;
}

}  // namespace detail

/// Builds a deterministic factorized model from two outcome strategies.
/// Strategies returning anything outside {+1,-1} are rejected.
inline LocalModel deterministic_lhv(Strategy strategy_a, Strategy strategy_b,
                                    SourceSampler source_sampler, int hidden_dim = 1,
                                    bool periodic_uniform_hidden = true) {
  if (!strategy_a || !strategy_b) {
    throw std::invalid_argument("deterministic_lhv: strategy not set");
  }
  LocalModel model;
  model.hidden_dim = hidden_dim;
  model.deterministic = true;
  model.periodic_uniform_hidden = periodic_uniform_hidden;
  model.source_sampler = std::move(source_sampler);
  model.response_a = [s = std::move(strategy_a)](const Setting& a, const HiddenSample& h) {
    return detail::checked_outcome(s(a, h), "A") > 0 ? 1.0 : 0.0;
  };
  model.response_b = [s = std::move(strategy_b)](const Setting& b, const HiddenSample& h) {
    return detail::checked_outcome(s(b, h), "B") > 0 ? 1.0 : 0.0;
  };
  return model;
}

/// Constant-outcome strategies; E(a,b) = outcome_a * outcome_b everywhere.
inline LocalModel constant_outcome_model(int outcome_a, int outcome_b) {
  detail::checked_outcome(outcome_a, "A");
  detail::checked_outcome(outcome_b, "B");
  return deterministic_lhv(
      [outcome_a](const Setting&, const HiddenSample&) { return outcome_a; },
      [outcome_b](const Setting&, const HiddenSample&) { return outcome_b; },
      uniform_angle_source(1), 1, true);
}

/// Deterministic sign model over a shared random angle h:
///   A(a,h) = sign cos(a - h),  B(b,h) = -sign cos(b - h),  h ~ U[0, 2*pi).
/// Its correlator is the triangle wave E(a,b) = -1 + 2 d(a,b)/pi with d the
/// angular distance, so E(a,a) = -1 and E vanishes at d = pi/2.
inline LocalModel opposite_sign_model() {
  auto sign_of = [](double x) { return x >= 0.0 ? 1 : -1; };
  return deterministic_lhv(
      [sign_of](const Setting& a, const HiddenSample& h) {
        return sign_of(std::cos(a.radians() - h.values[0]));
      },
      [sign_of](const Setting& b, const HiddenSample& h) {
        return -sign_of(std::cos(b.radians() - h.values[0]));
      },
      uniform_angle_source(1), 1, true);
}

/// Stochastic factorized example with smooth responses
///   pA(+|a,h) = (1 + cos(a - h))/2,  pB(+|b,h) = (1 - cos(b - h))/2,
/// giving E(a,b) = -cos(a - b)/2: the cosine shape at half amplitude, the
/// most a factorized model of this form can reach.
inline LocalModel cosine_response_model() {
  LocalModel model;
  model.hidden_dim = 1;
  model.deterministic = false;
  model.periodic_uniform_hidden = true;
  model.source_sampler = uniform_angle_source(1);
  model.response_a = [](const Setting& a, const HiddenSample& h) {
    return 0.5 * (1.0 + std::cos(a.radians() - h.values[0]));
  };
  model.response_b = [](const Setting& b, const HiddenSample& h) {
    return 0.5 * (1.0 - std::cos(b.radians() - h.values[0]));
  };
  return model;
}

// ---------------------------------------------------------------------------
// Singlet reference
// ---------------------------------------------------------------------------

/// Quantum two-qubit singlet prediction for coplanar spin measurements:
///   p(A,B | a,b) = (1 - A*B*cos(a - b))/4,  E(a,b) = -cos(a - b),
/// with uniform single-wing marginals.
inline OutcomeTable singlet_outcome_table(const Setting& a, const Setting& b) {
  OutcomeTable t;
  const double c = std::cos(a.radians() - b.radians());
  for (int A : {+1, -1}) {
    for (int B : {+1, -1}) {
      t.at(A, B) = 0.25 * (1.0 - A * B * c);
    }
  }
  return t;
}

inline Behavior singlet_reference_behavior(const std::vector<Setting>& settings_a,
                                           const std::vector<Setting>& settings_b) {
  if (settings_a.empty() || settings_b.empty()) {
    throw std::invalid_argument("singlet_reference_behavior: empty setting list");
  }
  Behavior behavior = make_behavior(settings_a, settings_b);
  for (std::size_t i = 0; i < behavior.n_a(); ++i) {
    for (std::size_t j = 0; j < behavior.n_b(); ++j) {
      behavior.cell(i, j) = singlet_outcome_table(settings_a[i], settings_b[j]);
    }
  }
  return behavior;
}

/// The singlet prediction wrapped as a trivial-source joint model (hidden_dim
/// 0, conditional independent of h). Useful for feeding the singlet into
/// model-level checks and correlator machinery.
inline JointModel singlet_reference_model() {
  JointModel model;
  model.hidden_dim = 0;
  model.periodic_uniform_hidden = true;
  model.source_sampler = [](RandomStream&) { return HiddenSample{}; };
  model.joint_conditional = [](const Setting& a, const Setting& b, const HiddenSample&) {
    return singlet_outcome_table(a, b);
  };
  return model;
}

// ---------------------------------------------------------------------------
// Unnikrishnan phase model
// ---------------------------------------------------------------------------

/// Parameters of the phase-correlation model. The source fixes the phase
/// difference phi1 - phi2 = delta_phi, draws phi1 uniformly on [0, 2*pi), and
/// each particle carries its own phase to the instrument.
struct UnnikrishnanParams {
  double s = 0.5;          // spin parameter, > 0
  double delta_phi = kPi;  // source-fixed value of phi1 - phi2, radians

  void validate() const {
    if (!(s > 0.0)) throw std::invalid_argument("unnikrishnan: s must be > 0");
  }
};

/// Single-particle detection amplitude for outcome `outcome` at setting q
/// with carried phase phi: exp(i * s * outcome * (q + phi)).
inline std::complex<double> unnikrishnan_amplitude(double q, double phi, double s,
                                                   int outcome) {
  const double arg = s * static_cast<double>(outcome) * (q + phi);
  return {std::cos(arg), std::sin(arg)};
}

/// Amplitude correlation Re(C1 * conj(C2)) for the (+,+) amplitudes,
/// which evaluates to cos(s*(q1 - q2) + s*(phi1 - phi2)).
///
/// The amplitudes are evaluated in the frame where q2 = 0 and q1 is the
/// circular difference of the two settings, so the result depends only on
/// that difference (exact shift invariance for every s, including values
/// where exp(i*s*q) itself is not 2*pi-periodic in q).
inline double unnikrishnan_amplitude_correlation(const Setting& q1, const Setting& q2,
                                                 double phi1, double phi2, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("unnikrishnan: s must be > 0");
  const double dq = circular_difference(q1, q2);
  const auto c1 = unnikrishnan_amplitude(dq, phi1, s, +1);
  const auto c2 = unnikrishnan_amplitude(0.0, phi2, s, +1);
  return (c1 * std::conj(c2)).real();
}

/// Joint outcome probability of the phase model,
///   p(A,B | q1,q2,phi1,phi2) = [1 + A*B*cos(2s(q1-q2) + 2s(phi1-phi2))]/4.
/// For A*B = +1 this is cos^2[s(q1-q2)+s(phi1-phi2)]/2; for A*B = -1 the
/// matching sin^2 form. The four outcomes sum to 1 and both single-wing
/// marginals are 1/2 for every input.
inline double unnikrishnan_joint_probability(const Setting& q1, const Setting& q2,
                                             double phi1, double phi2, double s,
                                             int outcome_a, int outcome_b) {
  if (!(s > 0.0)) throw std::invalid_argument("unnikrishnan: s must be > 0");
  detail::checked_outcome(outcome_a, "A");
  detail::checked_outcome(outcome_b, "B");
  const double phase = 2.0 * s * circular_difference(q1, q2) + 2.0 * s * (phi1 - phi2);
  return 0.25 * (1.0 + outcome_a * outcome_b * std::cos(phase));
}

inline OutcomeTable unnikrishnan_outcome_table(const Setting& q1, const Setting& q2,
                                               double phi1, double phi2, double s) {
  OutcomeTable t;
  for (int A : {+1, -1}) {
    for (int B : {+1, -1}) {
      t.at(A, B) = unnikrishnan_joint_probability(q1, q2, phi1, phi2, s, A, B);
    }
  }
  return t;
}

/// The phase model as a joint model. The hidden variable is the sampled phi1;
/// phi2 = phi1 - delta_phi is derived inside the conditional. Its correlator
/// is E(q1,q2) = cos(2s(q1-q2) + 2s*delta_phi); with s = 1/2 and
/// delta_phi = pi it reproduces the singlet value -cos(q1-q2).
inline JointModel unnikrishnan_model(const UnnikrishnanParams& params) {
  params.validate();
  JointModel model;
  model.hidden_dim = 1;
  model.periodic_uniform_hidden = true;
  model.source_sampler = uniform_angle_source(1);
  model.joint_conditional = [params](const Setting& q1, const Setting& q2,
                                     const HiddenSample& h) {
    const double phi1 = h.values[0];
    const double phi2 = phi1 - params.delta_phi;
    return unnikrishnan_outcome_table(q1, q2, phi1, phi2, params.s);
  };
  return model;
}

}  // namespace bell_lab
