#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace bell_lab {

/// Exact rational with 64-bit numerator/denominator and overflow-checked
/// arithmetic (128-bit intermediates). Intended for small dense problems
/// whose data are modest fractions.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT implicit by design
  Rational(std::int64_t num, std::int64_t den) { assign(num, den); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  friend Rational operator+(const Rational& x, const Rational& y) {
    return from_i128(static_cast<__int128>(x.num_) * y.den_ +
                         static_cast<__int128>(y.num_) * x.den_,
                     static_cast<__int128>(x.den_) * y.den_);
  }
  friend Rational operator-(const Rational& x, const Rational& y) {
    return from_i128(static_cast<__int128>(x.num_) * y.den_ -
                         static_cast<__int128>(y.num_) * x.den_,
                     static_cast<__int128>(x.den_) * y.den_);
  }
  friend Rational operator*(const Rational& x, const Rational& y) {
    return from_i128(static_cast<__int128>(x.num_) * y.num_,
                     static_cast<__int128>(x.den_) * y.den_);
  }
  friend Rational operator/(const Rational& x, const Rational& y) {
    if (y.num_ == 0) throw std::domain_error("Rational: division by zero");
    return from_i128(static_cast<__int128>(x.num_) * y.den_,
                     static_cast<__int128>(x.den_) * y.num_);
  }
  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }
  Rational& operator+=(const Rational& y) { return *this = *this + y; }
  Rational& operator-=(const Rational& y) { return *this = *this - y; }
  Rational& operator*=(const Rational& y) { return *this = *this * y; }
  Rational& operator/=(const Rational& y) { return *this = *this / y; }

  friend bool operator==(const Rational& x, const Rational& y) {
    return x.num_ == y.num_ && x.den_ == y.den_;
  }
  friend bool operator!=(const Rational& x, const Rational& y) { return !(x == y); }
  friend bool operator<(const Rational& x, const Rational& y) {
    return static_cast<__int128>(x.num_) * y.den_ <
           static_cast<__int128>(y.num_) * x.den_;
  }
  friend bool operator>(const Rational& x, const Rational& y) { return y < x; }
  friend bool operator<=(const Rational& x, const Rational& y) { return !(y < x); }
  friend bool operator>=(const Rational& x, const Rational& y) { return !(x < y); }

 private:
  void assign(std::int64_t num, std::int64_t den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    num_ = g ? num / g : num;
    den_ = g ? den / g : den;
  }

  static Rational from_i128(__int128 num, __int128 den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 b = den;
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a != 0) {
      num /= a;
      den /= a;
    }
    constexpr __int128 lo = std::numeric_limits<std::int64_t>::min();
    constexpr __int128 hi = std::numeric_limits<std::int64_t>::max();
    if (num < lo || num > hi || den > hi) {
      throw std::overflow_error("Rational: 64-bit overflow");
    }
    Rational r;
    r.num_ = static_cast<std::int64_t>(num);
    r.den_ = static_cast<std::int64_t>(den);
    return r;
  }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// Recovers the small fraction a double encodes, via continued-fraction
/// convergents with denominator <= max_denominator. Throws
/// std::invalid_argument when no convergent matches `x` to within a few ulp,
/// i.e. when the value is not (a rounding of) a small rational.
inline Rational rational_from_double(double x, std::int64_t max_denominator = 1000000) {
  if (!std::isfinite(x)) throw std::invalid_argument("rational_from_double: non-finite");
  if (max_denominator < 1) {
    throw std::invalid_argument("rational_from_double: bad max_denominator");
  }
  const bool negative = x < 0.0;
  double r = negative ? -x : x;
  std::int64_t p_prev = 1, q_prev = 0;
  std::int64_t p = static_cast<std::int64_t>(std::floor(r)), q = 1;
  double frac = r - std::floor(r);
  for (int iter = 0; iter < 64; ++iter) {
    const double approx = static_cast<double>(p) / static_cast<double>(q);
    if (std::fabs(approx - r) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                     std::max(1.0, r)) {
      return negative ? Rational(-p, q) : Rational(p, q);
    }
    if (frac == 0.0) break;
    const double inv = 1.0 / frac;
    const double term = std::floor(inv);
    if (term > static_cast<double>(max_denominator)) break;
    frac = inv - term;
    const std::int64_t a = static_cast<std::int64_t>(term);
    const std::int64_t p_next = a * p + p_prev;
    const std::int64_t q_next = a * q + q_prev;
    if (q_next > max_denominator || q_next <= 0) break;
    p_prev = p;
    q_prev = q;
    p = p_next;
    q = q_next;
  }
  throw std::invalid_argument("rational_from_double: " + std::to_string(x) +
                              " is not a small rational");
}

}  // namespace bell_lab
