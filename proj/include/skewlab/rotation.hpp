#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skewlab/frac128.hpp"

namespace skewlab {

/// Point on the d-torus with exact 128-bit coordinates.
struct TorusPoint {
  std::vector<Frac128> coords;

  int dim() const { return static_cast<int>(coords.size()); }
  friend bool operator==(const TorusPoint&, const TorusPoint&) = default;
};

/// Declared arithmetic quality of the rotation vector. Informational: it is
/// carried into reports, not verified at runtime.
enum class AlphaTag { Golden, Quadratic, LiouvilleLike, Custom };

std::string to_string(AlphaTag tag);
AlphaTag alpha_tag_from_string(const std::string& s);

/// Minimal rotation x -> x + alpha on the d-torus. Coordinates are exact
/// fractions; construction rejects vectors that are visibly dyadic (zero, or
/// 32+ trailing zero bits, i.e. denominator <= 2^96) since those cannot be
/// truncations of the irrationals the instance is declared to proxy.
/// Minimality itself (rational independence of the coordinates) is declared
/// by the caller, not checked.
class RotationSystem {
 public:
  RotationSystem(std::vector<Frac128> alpha, AlphaTag tag = AlphaTag::Custom);

  int dim() const { return static_cast<int>(alpha_.size()); }
  const std::vector<Frac128>& alpha() const { return alpha_; }
  AlphaTag tag() const { return tag_; }

 private:
  std::vector<Frac128> alpha_;
  AlphaTag tag_;
};

/// Largest |n| accepted by rotate and the return-time scans.
inline constexpr std::int64_t kMaxIterate = std::int64_t(1) << 62;

/// T^n x, computed directly from n * alpha (exact; bit-identical to n
/// stepwise applications).
TorusPoint rotate(const RotationSystem& base, const TorusPoint& x,
                  std::int64_t n);
void rotate_inplace(const RotationSystem& base, TorusPoint& x, std::int64_t n);

/// Max over coordinates of the circle distance (exact ticks, rounded once).
double base_distance(const RotationSystem& base, const TorusPoint& x,
                     const TorusPoint& y);
uint128 base_distance_raw(const RotationSystem& base, const TorusPoint& x,
                          const TorusPoint& y);

void check_point(const RotationSystem& base, const TorusPoint& x);

/// One continued-fraction level: partial quotient a_k and convergent
/// denominator q_k (q_0 = 1 is implicit; entries start at k = 1 with
/// q_1 = a_1, q_k = a_k q_{k-1} + q_{k-2}).
struct ConvergentEntry {
  std::uint64_t a = 0;
  std::int64_t q = 0;
};

struct ContinuedFraction {
  std::vector<ConvergentEntry> entries;
  /// Set when the expansion stopped early: either the exact rational proxy
  /// terminated or a denominator left the usable integer range.
  bool truncated = false;
};

/// Continued fraction of the exact stored fraction, by integer Euclid.
ContinuedFraction continued_fraction(Frac128 alpha, int depth);

struct ReturnTimes {
  std::vector<std::int64_t> times;  // ascending, deduplicated
  bool truncated = false;           // hit max_count before exhausting range
};

/// All n in [1, max_n] with max_i ||n alpha_i|| < eps, generated from signed
/// combinations of convergent denominators (Ostrowski digit search with
/// exact residue pruning). Sound and complete over the scanned range; when
/// more than max_count times exist the result is a valid subset flagged
/// truncated. By symmetry ||(-n) alpha|| = ||n alpha||, so negative return
/// times are the negatives of the returned list.
ReturnTimes best_return_times(const RotationSystem& base, double eps,
                              std::int64_t max_n,
                              std::size_t max_count = 2'000'000);

/// Reference linear scan, O(max_n * d); max_n capped at 10^7.
ReturnTimes brute_force_return_times(const RotationSystem& base, double eps,
                                     std::int64_t max_n);

}  // namespace skewlab
