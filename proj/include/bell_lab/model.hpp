#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bell_lab/angles.hpp"
#include "bell_lab/outcome_table.hpp"
#include "bell_lab/rng.hpp"

namespace bell_lab {

/// One realization of the hidden parameters h. A single sample describes the
/// whole particle pair; there is no per-wing split of h.
struct HiddenSample {
  std::vector<double> values;
  double weight = 1.0;
};

/// Draws one HiddenSample from the source distribution rho(h).
using SourceSampler = std::function<HiddenSample(RandomStream&)>;

/// P(outcome = +1 | setting, h) for one wing.
using ResponseFn = std::function<double(const Setting&, const HiddenSample&)>;

/// p(A, B | a, b, h); the four entries must be nonnegative and sum to 1.
using JointConditional =
    std::function<OutcomeTable(const Setting&, const Setting&, const HiddenSample&)>;

/// Factorized hidden-variable model: a source distribution plus independent
/// per-wing response probabilities. The correlator of such a model is
///   E(a,b) = integral dh rho(h) [2 pA(a,h) - 1][2 pB(b,h) - 1].
struct LocalModel {
  int hidden_dim = 1;
  /// True when both responses return exactly 0 or 1 for every input.
  bool deterministic = false;
  /// Hidden variables uniform on [0, 2*pi)^hidden_dim; enables quadrature.
  bool periodic_uniform_hidden = true;
  SourceSampler source_sampler;
  ResponseFn response_a;
  ResponseFn response_b;
};

/// General hidden-variable model: the conditional joint at fixed h need not
/// factorize into per-wing terms.
struct JointModel {
  int hidden_dim = 1;
  bool periodic_uniform_hidden = true;
  SourceSampler source_sampler;
  JointConditional joint_conditional;
};

/// Validates a response probability and clamps away sub-tolerance rounding.
inline double checked_response(double value, const char* wing) {
  if (!(value >= -1e-12 && value <= 1.0 + 1e-12)) {
    throw std::domain_error(std::string("response probability out of [0,1] on wing ") +
                            wing + ": " + std::to_string(value));
  }
  if (value < 0.0) return 0.0;
  if (value > 1.0) return 1.0;
  return value;
}

/// Product embedding of a factorized model: p(A,B|a,b,h) = pA(A|a,h) pB(B|b,h).
inline JointModel as_joint(const LocalModel& model) {
  JointModel joint;
  joint.hidden_dim = model.hidden_dim;
  joint.periodic_uniform_hidden = model.periodic_uniform_hidden;
  joint.source_sampler = model.source_sampler;
  joint.joint_conditional = [ra = model.response_a, rb = model.response_b](
                                const Setting& a, const Setting& b,
                                const HiddenSample& h) {
    double pa = checked_response(ra(a, h), "A");
    double pb = checked_response(rb(b, h), "B");
    return OutcomeTable::product(pa, pb);
  };
  return joint;
}

/// Evaluates a joint conditional and checks the table invariant.
inline OutcomeTable checked_joint(const JointModel& model, const Setting& a,
                                  const Setting& b, const HiddenSample& h) {
  OutcomeTable t = model.joint_conditional(a, b, h);
  if (!t.normalized(1e-12)) {
    throw std::domain_error("joint conditional is not a probability table");
  }
  return t;
}

}  // namespace bell_lab
