#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bell_lab/angles.hpp"
#include "bell_lab/outcome_table.hpp"

namespace bell_lab {

/// Finite experimental summary: the table p(A, B | a_i, b_j) over all
/// combinations of the chosen settings.
struct Behavior {
  std::vector<Setting> settings_a;
  std::vector<Setting> settings_b;
  std::vector<std::vector<OutcomeTable>> cells;  // cells[i][j]

  std::size_t n_a() const { return settings_a.size(); }
  std::size_t n_b() const { return settings_b.size(); }

  const OutcomeTable& cell(std::size_t i, std::size_t j) const { return cells[i][j]; }
  OutcomeTable& cell(std::size_t i, std::size_t j) { return cells[i][j]; }

  bool is_two_by_two() const { return n_a() == 2 && n_b() == 2; }
};

inline Behavior make_behavior(std::vector<Setting> settings_a,
                              std::vector<Setting> settings_b) {
  Behavior behavior;
  behavior.settings_a = std::move(settings_a);
  behavior.settings_b = std::move(settings_b);
  behavior.cells.assign(behavior.n_a(), std::vector<OutcomeTable>(behavior.n_b()));
  return behavior;
}

/// Throws std::invalid_argument unless every cell is a probability table
/// (entries nonnegative, summing to 1 within `tol`) and the shape matches
/// the setting lists.
inline void validate_behavior(const Behavior& behavior, double tol = 1e-12) {
  if (behavior.n_a() == 0 || behavior.n_b() == 0) {
    throw std::invalid_argument("behavior: empty setting list");
  }
  if (behavior.cells.size() != behavior.n_a()) {
    throw std::invalid_argument("behavior: cell row count does not match settings_a");
  }
  for (std::size_t i = 0; i < behavior.n_a(); ++i) {
    if (behavior.cells[i].size() != behavior.n_b()) {
      throw std::invalid_argument("behavior: cell column count does not match settings_b");
    }
    for (std::size_t j = 0; j < behavior.n_b(); ++j) {
      if (!behavior.cells[i][j].normalized(tol)) {
        throw std::invalid_argument("behavior: cell (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") is not a probability table");
      }
    }
  }
}

}  // namespace bell_lab
