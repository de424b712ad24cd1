#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace skewlab {

using uint128 = unsigned __int128;

/// Binary fraction with 128 fractional bits: the stored word v represents
/// v / 2^128 in [0,1). Addition and subtraction wrap modulo 1 through native
/// unsigned overflow, so circle arithmetic is exact and iterating a rotation
/// never drifts. Any instance is a rational proxy (denominator 2^128) for the
/// real number it stands in for; consumers that need irrationality reject
/// short dyadics, see RotationSystem.
class Frac128 {
 public:
  constexpr Frac128() = default;

  static constexpr Frac128 from_raw(uint128 v) {
    Frac128 f;
    f.v_ = v;
    return f;
  }

  /// Exact conversion; requires x in [0,1). A double has 53 mantissa bits so
  /// x * 2^128 is an integer representable in the 128-bit word.
  static Frac128 from_double(double x);

  /// Parses "0.digits" (also ".digits") by repeated doubling of the decimal
  /// tail; the result is the 128-bit truncation of the exact decimal value.
  static Frac128 from_decimal(std::string_view text);

  /// Parses "0x" + up to 32 hex digits, high nibbles first; shorter strings
  /// are zero-padded on the right.
  static Frac128 from_hex(std::string_view text);

  /// floor(p / q * 2^128) via restoring division; requires p < q and
  /// q < 2^127.
  static Frac128 from_ratio(uint128 p, uint128 q);

  /// Named constants: "golden" = (sqrt(5)-1)/2 and "sqrt2m1" = sqrt(2)-1,
  /// realized as ratios of consecutive Fibonacci / Pell numbers large enough
  /// that the truncation error sits below the last stored bit.
  static Frac128 named(std::string_view name);

  constexpr uint128 raw() const { return v_; }
  double to_double() const;
  std::string to_hex() const;  // "0x" + 32 digits, round-trips via from_hex

  friend constexpr Frac128 operator+(Frac128 a, Frac128 b) {
    return from_raw(a.v_ + b.v_);
  }
  friend constexpr Frac128 operator-(Frac128 a, Frac128 b) {
    return from_raw(a.v_ - b.v_);
  }
  constexpr Frac128 operator-() const { return from_raw(uint128(0) - v_); }
  friend constexpr bool operator==(Frac128 a, Frac128 b) {
    return a.v_ == b.v_;
  }

  /// n * value mod 1, exact: the low 128 bits of the integer product are
  /// precisely the fractional ticks of n * (v / 2^128).
  constexpr Frac128 times(std::int64_t n) const {
    const bool neg = n < 0;
    const uint128 mag = neg ? uint128(0) - uint128(n) : uint128(n);
    const uint128 prod = v_ * mag;  // wraps mod 2^128 by definition
    return from_raw(neg ? uint128(0) - prod : prod);
  }

  /// Circle distance to 0 in raw ticks: min(v, 2^128 - v).
  constexpr uint128 dist_raw() const {
    const uint128 neg = uint128(0) - v_;
    return v_ < neg ? v_ : neg;
  }

  /// Circle distance to `other` as a double (the underlying ticks are exact;
  /// only this final conversion rounds).
  double circle_dist(Frac128 other) const;

  /// Number of trailing zero bits of the raw word (128 for zero). Used by
  /// the irrationality screen.
  int trailing_zero_bits() const;

 private:
  uint128 v_ = 0;
};

/// Integer threshold matching a real eps: comparing a raw circle distance
/// with `< eps_to_raw(eps)` is exactly the predicate distance < eps, because
/// eps * 2^128 is integral for any double eps in (0, 1). Values >= 1 clamp
/// to the maximum so every distance qualifies.
uint128 eps_to_raw(double eps);

double raw_to_double(uint128 ticks);  // ticks / 2^128

}  // namespace skewlab
