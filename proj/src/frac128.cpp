#include "skewlab/frac128.hpp"

#include <cmath>
#include <vector>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr uint128 kOne64 = uint128(1) << 64;

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Frac128 Frac128::from_double(double x) {
  if (!(x >= 0.0) || x >= 1.0)
    throw PrecisionError("fraction out of [0,1): " + std::to_string(x));
  // x * 2^128 is exactly representable in long double's 64-bit mantissa and
  // fits the 128-bit word since x < 1.
  const long double scaled = std::ldexp(static_cast<long double>(x), 128);
  return from_raw(static_cast<uint128>(scaled));
}

Frac128 Frac128::from_decimal(std::string_view text) {
  std::string_view s = text;
  if (!s.empty() && s.front() == '0') s.remove_prefix(1);
  if (s.empty() || s.front() != '.')
    throw PrecisionError("expected decimal fraction of the form 0.ddd, got '" +
                         std::string(text) + "'");
  s.remove_prefix(1);
  if (s.empty()) throw PrecisionError("decimal fraction has no digits");
  std::vector<int> digits;
  digits.reserve(s.size());
  for (char c : s) {
    if (c < '0' || c > '9')
      throw PrecisionError("bad digit in decimal fraction: '" +
                           std::string(text) + "'");
    digits.push_back(c - '0');
  }
  // Peel off 128 binary digits by doubling the decimal tail in place.
  uint128 v = 0;
  for (int bit = 0; bit < 128; ++bit) {
    int carry = 0;
    for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
      const int d = digits[i] * 2 + carry;
      digits[i] = d % 10;
      carry = d / 10;
    }
    v = (v << 1) | static_cast<unsigned>(carry);
  }
  return from_raw(v);
}

Frac128 Frac128::from_hex(std::string_view text) {
  if (text.size() < 3 || text[0] != '0' || (text[1] != 'x' && text[1] != 'X'))
    throw PrecisionError("expected 0x-prefixed hex fraction, got '" +
                         std::string(text) + "'");
  std::string_view s = text.substr(2);
  if (s.size() > 32)
    throw PrecisionError("hex fraction longer than 128 bits: '" +
                         std::string(text) + "'");
  uint128 v = 0;
  std::size_t used = 0;
  for (char c : s) {
    const int d = hex_digit(c);
    if (d < 0)
      throw PrecisionError("bad hex digit in '" + std::string(text) + "'");
    v = (v << 4) | static_cast<unsigned>(d);
    ++used;
  }
  v <<= 4 * (32 - used);
  return from_raw(v);
}

Frac128 Frac128::from_ratio(uint128 p, uint128 q) {
  if (q == 0 || p >= q || q >= (uint128(1) << 127))
    throw PrecisionError("from_ratio requires p < q < 2^127");
  uint128 rem = p;
  uint128 out = 0;
  for (int bit = 0; bit < 128; ++bit) {
    rem <<= 1;  // rem < q < 2^127, so this cannot overflow
    out <<= 1;
    if (rem >= q) {
      rem -= q;
      out |= 1;
    }
  }
  // Round to nearest tick. p < q keeps the true value at least one full
  // tick below 1, so the increment cannot wrap.
  if (rem * 2 >= q) out += 1;
  return from_raw(out);
}

Frac128 Frac128::named(std::string_view name) {
  const uint128 limit = uint128(1) << 100;
  if (name == "golden") {
    // Consecutive Fibonacci numbers: F(k)/F(k+1) -> (sqrt(5)-1)/2 with error
    // below 1/F(k+1)^2 < 2^-200, far under the last stored bit.
    uint128 a = 1, b = 1;
    while (b < limit) {
      const uint128 next = a + b;
      a = b;
      b = next;
    }
    return from_ratio(a, b);
  }
  if (name == "sqrt2m1") {
    // Consecutive Pell numbers: P(k)/P(k+1) -> sqrt(2)-1.
    uint128 a = 1, b = 2;
    while (b < limit) {
      const uint128 next = 2 * b + a;
      a = b;
      b = next;
    }
    return from_ratio(a, b);
  }
  throw PrecisionError("unknown named constant '" + std::string(name) +
                       "' (known: golden, sqrt2m1)");
}

double Frac128::to_double() const {
  return static_cast<double>(std::ldexp(static_cast<long double>(v_), -128));
}

std::string Frac128::to_hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out = "0x";
  for (int i = 31; i >= 0; --i)
    out += digits[static_cast<unsigned>((v_ >> (4 * i)) & 0xF)];
  return out;
}

double Frac128::circle_dist(Frac128 other) const {
  return raw_to_double((*this - other).dist_raw());
}

int Frac128::trailing_zero_bits() const {
  if (v_ == 0) return 128;
  const auto lo = static_cast<std::uint64_t>(v_);
  if (lo != 0) return __builtin_ctzll(lo);
  return 64 + __builtin_ctzll(static_cast<std::uint64_t>(v_ >> 64));
}

uint128 eps_to_raw(double eps) {
  if (!(eps > 0.0)) return 0;
  if (eps >= 1.0) return ~uint128(0);
  const long double scaled = std::ldexp(static_cast<long double>(eps), 128);
  return static_cast<uint128>(scaled);
}

double raw_to_double(uint128 ticks) {
  return static_cast<double>(std::ldexp(static_cast<long double>(ticks), -128));
}

}  // namespace skewlab
