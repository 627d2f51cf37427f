#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bell_lab/behavior.hpp"
#include "bell_lab/locality.hpp"
#include "bell_lab/rational.hpp"
#include "bell_lab/rng.hpp"
#include "bell_lab/simplex.hpp"

namespace bell_lab {

inline constexpr int kNumDeterministicVertices = 16;

/// Canonical 2x2 scenario settings used when a caller does not care about
/// the actual angles (vertex tables are angle-independent).
inline std::vector<Setting> canonical_settings_a() {
  return {Setting(0.0), Setting(kPi / 2.0)};
}
inline std::vector<Setting> canonical_settings_b() {
  return {Setting(kPi / 4.0), Setting(3.0 * kPi / 4.0)};
}

/// One deterministic local strategy of the 2-setting scenario: fixed outcomes
/// (A(a), A(a'), B(b), B(b')) and the induced 0/1 behavior.
struct DeterministicVertex {
  int index = 0;                      // bit-coded: bit set => outcome -1, in
                                      // order (A(a), A(a'), B(b), B(b'))
  std::array<int, 4> assignment{};    // A(a), A(a'), B(b), B(b')
  Behavior behavior;
};

inline std::vector<DeterministicVertex> enumerate_deterministic_vertices(
    const std::vector<Setting>& settings_a, const std::vector<Setting>& settings_b) {
  if (settings_a.size() != 2 || settings_b.size() != 2) {
    throw std::invalid_argument("deterministic vertices: need 2x2 settings");
  }
  std::vector<DeterministicVertex> vertices;
  vertices.reserve(kNumDeterministicVertices);
  for (int k = 0; k < kNumDeterministicVertices; ++k) {
    DeterministicVertex v;
    v.index = k;
    for (int bit = 0; bit < 4; ++bit) {
      v.assignment[static_cast<std::size_t>(bit)] = (k >> (3 - bit)) & 1 ? -1 : +1;
    }
    v.behavior = make_behavior(settings_a, settings_b);
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        const int a_out = v.assignment[i];
        const int b_out = v.assignment[2 + j];
        OutcomeTable t;
        t.at(a_out, b_out) = 1.0;
        v.behavior.cell(i, j) = t;
      }
    }
    vertices.push_back(std::move(v));
  }
  return vertices;
}

inline std::vector<DeterministicVertex> enumerate_deterministic_vertices() {
  return enumerate_deterministic_vertices(canonical_settings_a(), canonical_settings_b());
}

/// Exact local CHSH bound: the maximum of |S| over the 16 deterministic
/// strategies, computed in integer arithmetic. Always 2.
inline double local_bound_chsh() {
  int best = 0;
  for (int k = 0; k < kNumDeterministicVertices; ++k) {
    const int a0 = (k & 8) ? -1 : 1;
    const int a1 = (k & 4) ? -1 : 1;
    const int b0 = (k & 2) ? -1 : 1;
    const int b1 = (k & 1) ? -1 : 1;
    const int s = a0 * b0 + a0 * b1 + a1 * b0 - a1 * b1;
    const int mag = s < 0 ? -s : s;
    if (mag > best) best = mag;
  }
  return static_cast<double>(best);
}

/// The eight CHSH expressions of a 2x2 behavior. Forms 0..3 put the minus
/// sign on term k of [E(a,b), E(a,b'), E(a',b), E(a',b')]; forms 4..7 are
/// their negatives. A no-signaling behavior is local iff every value is
/// <= 2 (each form is a facet of the local polytope). Form 3 matches the
/// s_value sign convention of ChshResult.
inline std::array<double, 8> chsh_inequalities(const Behavior& behavior) {
  if (!behavior.is_two_by_two()) {
    throw std::invalid_argument("chsh_inequalities requires a 2x2 behavior");
  }
  const std::array<double, 4> e = {
      behavior.cell(0, 0).correlator(), behavior.cell(0, 1).correlator(),
      behavior.cell(1, 0).correlator(), behavior.cell(1, 1).correlator()};
  const double total = e[0] + e[1] + e[2] + e[3];
  std::array<double, 8> values{};
  for (std::size_t k = 0; k < 4; ++k) {
    values[k] = total - 2.0 * e[k];
    values[4 + k] = -values[k];
  }
  return values;
}

// ---------------------------------------------------------------------------
// Membership
// ---------------------------------------------------------------------------

struct signaling_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

enum class MembershipStatus { local, nonlocal };

struct ViolatedInequality {
  int index = 0;   // into chsh_inequalities order
  double value = 0.0;
};

struct MembershipVerdict {
  MembershipStatus status = MembershipStatus::local;
  /// Convex weights over the 16 vertices (vertex index order); set iff local.
  std::vector<double> weights;
  /// The maximally violated CHSH form; set iff nonlocal.
  std::optional<ViolatedInequality> violated_inequality;
  /// max CHSH value - 2: depth of violation when positive, margin inside the
  /// polytope when negative or zero.
  double gap = 0.0;
  /// Local verdicts only: max absolute cell error of the weighted vertex
  /// mixture against the input.
  double reconstruction_error = 0.0;
};

namespace detail {

/// Cell rows of the vertex matrix: row r = (pair index)*4 + outcome index,
/// column = vertex index; the final row is the weight-sum constraint.
template <typename Field>
std::vector<std::vector<Field>> vertex_constraint_matrix() {
  const auto vertices = enumerate_deterministic_vertices();
  std::vector<std::vector<Field>> a(17, std::vector<Field>(16, Field{}));
  for (int k = 0; k < kNumDeterministicVertices; ++k) {
    std::size_t row = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        for (std::size_t o = 0; o < 4; ++o, ++row) {
          if (vertices[static_cast<std::size_t>(k)].behavior.cell(i, j).p[o] > 0.5) {
            a[row][static_cast<std::size_t>(k)] = Field{1};
          }
        }
      }
    }
    a[16][static_cast<std::size_t>(k)] = Field{1};
  }
  return a;
}

inline double max_cell_error(const Behavior& behavior, const std::vector<double>& weights) {
  const auto vertices = enumerate_deterministic_vertices();
  double worst = 0.0;
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t o = 0; o < 4; ++o) {
        double mix = 0.0;
        for (int k = 0; k < kNumDeterministicVertices; ++k) {
          mix += weights[static_cast<std::size_t>(k)] *
                 vertices[static_cast<std::size_t>(k)].behavior.cell(i, j).p[o];
        }
        worst = std::max(worst, std::fabs(mix - behavior.cell(i, j).p[o]));
      }
    }
  }
  return worst;
}

inline void finish_verdict(MembershipVerdict& verdict, const Behavior& behavior,
                           bool feasible, double tol) {
  const auto forms = chsh_inequalities(behavior);
  std::size_t arg = 0;
  for (std::size_t k = 1; k < forms.size(); ++k) {
    if (forms[k] > forms[arg]) arg = k;
  }
  verdict.gap = forms[arg] - 2.0;
  if (feasible) {
    verdict.status = MembershipStatus::local;
    if (verdict.gap > 10.0 * tol) {
      throw solver_error("membership: LP feasible but a CHSH facet is violated");
    }
  } else {
    verdict.status = MembershipStatus::nonlocal;
    verdict.weights.clear();
    if (verdict.gap < -10.0 * tol) {
      throw solver_error("membership: LP infeasible but all CHSH facets hold");
    }
    verdict.violated_inequality =
        ViolatedInequality{static_cast<int>(arg), forms[arg]};
  }
}

}  // namespace detail

/// Decides local-polytope membership of a no-signaling 2x2 behavior by
/// linear feasibility over the 16 deterministic vertices, cross-checked
/// against the eight CHSH facets. Signaling inputs are rejected with
/// signaling_error. Behaviors on the boundary (|S| = 2) are local.
inline MembershipVerdict membership(const Behavior& behavior, double tol = kDefaultTol) {
  if (!behavior.is_two_by_two()) {
    throw std::invalid_argument("membership requires a 2x2 behavior");
  }
  validate_behavior(behavior, 1e-9);
  const LocalityReport ns = no_signaling_check(behavior, tol);
  if (!ns.pass) {
    throw signaling_error("membership: behavior is signaling (residual " +
                          std::to_string(ns.max_residual) + ")");
  }

  auto a = detail::vertex_constraint_matrix<double>();
  std::vector<double> b;
  b.reserve(17);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      for (std::size_t o = 0; o < 4; ++o) {
        b.push_back(std::max(0.0, behavior.cell(i, j).p[o]));
      }
    }
  }
  b.push_back(1.0);

  const auto lp = solve_equality_feasibility<double>(a, b, 1e-12);
  MembershipVerdict verdict;
  const bool feasible = lp.infeasibility <= tol;
  if (feasible) {
    verdict.weights = lp.solution;
    double total = 0.0;
    for (double& w : verdict.weights) {
      if (w < 0.0) w = 0.0;
      total += w;
    }
    if (total > 0.0) {
      for (double& w : verdict.weights) w /= total;
    }
    verdict.reconstruction_error = detail::max_cell_error(behavior, verdict.weights);
  }
  detail::finish_verdict(verdict, behavior, feasible, tol);
  return verdict;
}

/// Exact-arithmetic membership for behaviors whose cells are small rationals
/// (up to double rounding). Cells are rationalized by continued fractions and
/// must then sum to exactly 1 per setting pair; the simplex runs over exact
/// rationals, so the verdict carries no floating tolerance.
inline MembershipVerdict membership_exact(const Behavior& behavior,
                                          std::int64_t max_denominator = 1000000,
                                          double tol = kDefaultTol) {
  if (!behavior.is_two_by_two()) {
    throw std::invalid_argument("membership requires a 2x2 behavior");
  }
  validate_behavior(behavior, 1e-9);
  const LocalityReport ns = no_signaling_check(behavior, tol);
  if (!ns.pass) {
    throw signaling_error("membership: behavior is signaling (residual " +
                          std::to_string(ns.max_residual) + ")");
  }

  auto a = detail::vertex_constraint_matrix<Rational>();
  std::vector<Rational> b;
  b.reserve(17);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      Rational sum(0);
      for (std::size_t o = 0; o < 4; ++o) {
        const Rational cell = rational_from_double(behavior.cell(i, j).p[o], max_denominator);
        if (cell < Rational(0)) {
          throw std::invalid_argument("membership_exact: negative rational cell");
        }
        sum += cell;
        b.push_back(cell);
      }
      if (sum != Rational(1)) {
        throw std::invalid_argument(
            "membership_exact: rationalized cells do not sum to 1");
      }
    }
  }
  b.push_back(Rational(1));

  const auto lp = solve_equality_feasibility<Rational>(a, b, Rational(0));
  MembershipVerdict verdict;
  if (lp.feasible) {
    verdict.weights.reserve(16);
    for (const Rational& w : lp.solution) verdict.weights.push_back(w.to_double());
    verdict.reconstruction_error = 0.0;  // exact reconstruction by construction
  }
  detail::finish_verdict(verdict, behavior, lp.feasible, tol);
  return verdict;
}

/// Uniform random no-signaling 2x2 behavior. Signed marginals and the four
/// correlators are drawn uniformly on [-1,1] and the draw is rejected until
/// every induced cell p = (1 + A*mA + B*mB + A*B*E)/4 is nonnegative; the
/// cells then automatically form normalized tables.
inline Behavior random_no_signaling_behavior(RandomStream& rng,
                                             const std::vector<Setting>& settings_a,
                                             const std::vector<Setting>& settings_b) {
  if (settings_a.size() != 2 || settings_b.size() != 2) {
    throw std::invalid_argument("random_no_signaling_behavior: need 2x2 settings");
  }
  Behavior behavior = make_behavior(settings_a, settings_b);
  while (true) {
    std::array<double, 2> ma{}, mb{};
    std::array<std::array<double, 2>, 2> e{};
    for (double& v : ma) v = 2.0 * rng.uniform01() - 1.0;
    for (double& v : mb) v = 2.0 * rng.uniform01() - 1.0;
    for (auto& row : e) {
      for (double& v : row) v = 2.0 * rng.uniform01() - 1.0;
    }
    bool ok = true;
    for (std::size_t i = 0; i < 2 && ok; ++i) {
      for (std::size_t j = 0; j < 2 && ok; ++j) {
        OutcomeTable t;
        for (int A : {+1, -1}) {
          for (int B : {+1, -1}) {
            const double p = 0.25 * (1.0 + A * ma[i] + B * mb[j] + A * B * e[i][j]);
            if (p < 0.0) {
              ok = false;
              break;
            }
            t.at(A, B) = p;
          }
          if (!ok) break;
        }
        if (ok) behavior.cell(i, j) = t;
      }
    }
    if (ok) return behavior;
  }
}

inline Behavior random_no_signaling_behavior(RandomStream& rng) {
  return random_no_signaling_behavior(rng, canonical_settings_a(), canonical_settings_b());
}

/// The extremal no-signaling box: perfectly correlated outcomes except when
/// both "primed" settings are chosen; every cell pair has uniform marginals
/// and |S| reaches 4 on the first CHSH form.
inline Behavior pr_box_behavior(const std::vector<Setting>& settings_a,
                                const std::vector<Setting>& settings_b) {
  if (settings_a.size() != 2 || settings_b.size() != 2) {
    throw std::invalid_argument("pr_box_behavior: need 2x2 settings");
  }
  Behavior behavior = make_behavior(settings_a, settings_b);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      OutcomeTable t;
      const bool anti = (i == 1 && j == 1);
      if (anti) {
        t.at(+1, -1) = 0.5;
        t.at(-1, +1) = 0.5;
      } else {
        t.at(+1, +1) = 0.5;
        t.at(-1, -1) = 0.5;
      }
      behavior.cell(i, j) = t;
    }
  }
  return behavior;
}

inline Behavior pr_box_behavior() {
  return pr_box_behavior(canonical_settings_a(), canonical_settings_b());
}

}  // namespace bell_lab
