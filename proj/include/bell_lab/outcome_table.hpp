#pragma once

#include <array>
#include <cmath>
#include <cstddef>

namespace bell_lab {

/// Joint distribution over the four outcome pairs (A, B), A, B in {+1, -1}.
/// Entry order is [p(+,+), p(+,-), p(-,+), p(-,-)].
struct OutcomeTable {
  std::array<double, 4> p{0.0, 0.0, 0.0, 0.0};

  static std::size_t index(int a, int b) {
    return (a > 0 ? 0u : 2u) + (b > 0 ? 0u : 1u);
  }

  double operator()(int a, int b) const { return p[index(a, b)]; }
  double& at(int a, int b) { return p[index(a, b)]; }

  /// P(A = a), summed over B.
  double marginal_a(int a) const { return p[index(a, +1)] + p[index(a, -1)]; }
  /// P(B = b), summed over A.
  double marginal_b(int b) const { return p[index(+1, b)] + p[index(-1, b)]; }

  /// E = <A*B> = p(+,+) - p(+,-) - p(-,+) + p(-,-).
  double correlator() const { return p[0] - p[1] - p[2] + p[3]; }

  double sum() const { return p[0] + p[1] + p[2] + p[3]; }

  bool normalized(double tol = 1e-12) const {
    if (std::fabs(sum() - 1.0) > tol) return false;
    for (double v : p) {
      if (v < -tol || v > 1.0 + tol) return false;
    }
    return true;
  }

  /// Product table from independent per-wing probabilities of outcome +1.
  static OutcomeTable product(double p_a_plus, double p_b_plus) {
    OutcomeTable t;
    t.at(+1, +1) = p_a_plus * p_b_plus;
    t.at(+1, -1) = p_a_plus * (1.0 - p_b_plus);
    t.at(-1, +1) = (1.0 - p_a_plus) * p_b_plus;
    t.at(-1, -1) = (1.0 - p_a_plus) * (1.0 - p_b_plus);
    return t;
  }
};

}  // namespace bell_lab
