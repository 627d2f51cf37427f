#pragma once

#include <cmath>

namespace bell_lab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Default absolute tolerance for floating-point comparisons.
inline constexpr double kDefaultTol = 1e-9;

/// Maps an angle in radians to its canonical representative in [0, 2*pi).
inline double canonical_angle(double radians) {
  double a = std::fmod(radians, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  if (a >= kTwoPi) a = 0.0;  // fmod rounding at the seam
  return a;
}

/// A measurement setting: a single angle in radians, stored canonically
/// in [0, 2*pi).
class Setting {
 public:
  Setting() = default;
  explicit Setting(double radians) : radians_(canonical_angle(radians)) {}

  double radians() const { return radians_; }

 private:
  double radians_ = 0.0;
};

/// Angular separation between two settings, folded to [0, pi].
inline double angular_distance(const Setting& x, const Setting& y) {
  double d = std::fabs(x.radians() - y.radians());
  if (d > kPi) d = kTwoPi - d;
  return d;
}

/// Signed circular difference x - y, folded to (-pi, pi]. Shift-invariant:
/// adding a common offset to both settings leaves the result unchanged.
inline double circular_difference(const Setting& x, const Setting& y) {
  double d = std::fmod(x.radians() - y.radians() + kPi, kTwoPi);
  if (d <= 0.0) d += kTwoPi;
  return d - kPi;
}

}  // namespace bell_lab
