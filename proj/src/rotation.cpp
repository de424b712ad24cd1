#include "skewlab/rotation.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_set>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

constexpr uint128 kHalfCircle = uint128(1) << 127;

void check_iterate_range(std::int64_t n) {
  if (n > kMaxIterate || n < -kMaxIterate)
    throw Error("iterate count exceeds 2^62: " + std::to_string(n));
}

// Saturating add on raw ticks; the room bounds below only need "at least".
uint128 sat_add(uint128 a, uint128 b) {
  const uint128 s = a + b;
  return s < a ? ~uint128(0) : s;
}

// One Ostrowski ladder level for a single coordinate.
struct Level {
  std::int64_t q;      // convergent denominator, <= max_n
  uint128 step;        // q * v mod 2^128
  uint128 digit_cap;   // max digit at this level (a_{k+1}, top level clamped)
  uint128 pos_room;    // max positive residue shift completable from here down
  uint128 neg_room;    // max negative residue shift (as magnitude)
};

// Euclid on (2^128, v) delivers the partial quotients a_k and the exact
// scaled errors D_k = |q_k alpha - p_k| * 2^128 as its remainder sequence;
// theta_k alternates sign starting positive.
std::vector<Level> build_ladder(uint128 v, std::int64_t max_n) {
  std::vector<Level> levels;
  if (v == 0) return levels;

  const uint128 all_ones = ~uint128(0);
  uint128 a_next = all_ones / v;  // a_1 = floor(2^128 / v)
  uint128 rem = all_ones % v + 1;
  if (rem == v) {
    a_next += 1;
    rem = 0;
  }

  const uint128 budget = static_cast<uint128>(max_n);
  uint128 d_cur = v;     // D_k, starting at D_0 = v
  uint128 d_next = rem;  // D_{k+1}
  uint128 q_prev = 0;    // q_{k-1}
  uint128 q_cur = 1;     // q_k
  while (q_cur <= budget) {
    Level lv;
    lv.q = static_cast<std::int64_t>(q_cur);
    lv.step = v * q_cur;  // natural wrap = q alpha mod 1 in ticks
    lv.digit_cap = a_next;
    levels.push_back(lv);

    // Advance the ladder: q_{k+1} = a_{k+1} q_k + q_{k-1}, Euclid step on D.
    // When a_next alone would push q past the budget the exact value does
    // not matter (and the product could overflow), so use a sentinel.
    const uint128 q_next =
        a_next > budget / q_cur ? budget + 1 : a_next * q_cur + q_prev;
    q_prev = q_cur;
    q_cur = q_next;
    if (d_next == 0) break;  // exact rational proxy exhausted
    const uint128 a_after = d_cur / d_next;
    const uint128 d_after = d_cur % d_next;
    d_cur = d_next;
    d_next = d_after;
    a_next = a_after;
  }
  if (levels.empty()) return levels;

  // Clamp the top digit so every enumerated n stays within [0, max_n].
  Level& top = levels.back();
  const uint128 by_budget = budget / static_cast<uint128>(top.q);
  top.digit_cap = std::min(top.digit_cap, by_budget);

  // Completion rooms. Each digit at level k shifts the residue by the
  // level's step; whether that is a forward or backward move on the circle
  // is read off the step itself (only level 0 can carry a lifted error
  // >= 1/2, when alpha itself does). digit_cap * D_k never overflows: it is
  // bounded by D_{k-1} for inner levels and by 2^128 - D_1 at level 0.
  uint128 pos = 0, neg = 0;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const bool forward = levels[k].step < kHalfCircle;
    const uint128 d_k =
        forward ? levels[k].step : uint128(0) - levels[k].step;
    const uint128 contrib = levels[k].digit_cap * d_k;
    if (forward)
      pos = sat_add(pos, contrib);
    else
      neg = sat_add(neg, contrib);
    levels[k].pos_room = pos;
    levels[k].neg_room = neg;
  }
  return levels;
}

struct DigitSearch {
  const std::vector<Level>& levels;
  const std::vector<Frac128>& alpha;
  uint128 eps_raw;
  std::int64_t max_n;
  std::size_t max_count;
  std::int64_t node_budget;
  std::vector<std::int64_t> hits;
  bool truncated = false;
  // The digit caps admit redundant representations of the same n (no
  // canonical-form constraint), so distinctness must be enforced here or the
  // count cap would tally repeats.
  std::unordered_set<std::int64_t> seen;

  bool spend() {
    if (--node_budget < 0) {
      truncated = true;
      return false;
    }
    return true;
  }

  // Does [r - neg, r + pos] (circular) meet the open ball of radius eps_raw
  // around 0?
  bool reachable(uint128 r, uint128 pos, uint128 neg) const {
    const uint128 span = sat_add(pos, neg);
    if (span == ~uint128(0)) return true;
    const uint128 start = r - neg;
    const uint128 offset = uint128(0) - start;  // arc position of 0
    if (offset <= span) return true;
    const uint128 d_start = std::min(start, uint128(0) - start);
    const uint128 end = r + pos;
    const uint128 d_end = std::min(end, uint128(0) - end);
    return std::min(d_start, d_end) < eps_raw;
  }

  bool accept(std::int64_t n, uint128 r) const {
    if (n < 1) return false;
    if (std::min(r, uint128(0) - r) >= eps_raw) return false;
    for (std::size_t i = 1; i < alpha.size(); ++i)
      if (alpha[i].times(n).dist_raw() >= eps_raw) return false;
    return true;
  }

  void run(int k, std::int64_t n, uint128 r) {
    if (truncated || hits.size() >= max_count) {
      truncated = true;
      return;
    }
    if (!spend()) return;
    if (k < 0) {
      if (accept(n, r) && seen.insert(n).second) hits.push_back(n);
      return;
    }
    const Level& lv = levels[static_cast<std::size_t>(k)];
    if (!reachable(r, lv.pos_room, lv.neg_room)) return;
    const uint128 by_budget =
        static_cast<uint128>(max_n - n) / static_cast<uint128>(lv.q);
    const uint128 cap = std::min(lv.digit_cap, by_budget);
    uint128 r_c = r;
    std::int64_t n_c = n;
    for (uint128 c = 0;; ++c) {
      run(k - 1, n_c, r_c);
      if (truncated || c == cap) break;
      r_c += lv.step;
      n_c += lv.q;
    }
  }
};

}  // namespace

std::string to_string(AlphaTag tag) {
  switch (tag) {
    case AlphaTag::Golden: return "golden";
    case AlphaTag::Quadratic: return "quadratic";
    case AlphaTag::LiouvilleLike: return "liouville-like";
    case AlphaTag::Custom: return "custom";
  }
  return "custom";
}

AlphaTag alpha_tag_from_string(const std::string& s) {
  if (s == "golden") return AlphaTag::Golden;
  if (s == "quadratic") return AlphaTag::Quadratic;
  if (s == "liouville-like") return AlphaTag::LiouvilleLike;
  if (s == "custom") return AlphaTag::Custom;
  throw ConfigError("base.type", "unknown diophantine tag '" + s +
                                     "' (golden, quadratic, liouville-like, "
                                     "custom)");
}

RotationSystem::RotationSystem(std::vector<Frac128> alpha, AlphaTag tag)
    : alpha_(std::move(alpha)), tag_(tag) {
  if (alpha_.empty()) throw DimensionError("rotation vector is empty");
  for (std::size_t i = 0; i < alpha_.size(); ++i) {
    // A genuine irrational truncated to 128 bits has essentially random low
    // bits; 32+ trailing zeros (denominator <= 2^96) marks an exact dyadic
    // such as 0.25, which generates a finite orbit.
    if (alpha_[i].raw() == 0 || alpha_[i].trailing_zero_bits() >= 32)
      throw PrecisionError(
          "alpha[" + std::to_string(i) +
          "] is a short dyadic rational; the rotation would not be minimal");
  }
}

TorusPoint rotate(const RotationSystem& base, const TorusPoint& x,
                  std::int64_t n) {
  TorusPoint y = x;
  rotate_inplace(base, y, n);
  return y;
}

void rotate_inplace(const RotationSystem& base, TorusPoint& x,
                    std::int64_t n) {
  check_point(base, x);
  check_iterate_range(n);
  for (int i = 0; i < base.dim(); ++i)
    x.coords[static_cast<std::size_t>(i)] =
        x.coords[static_cast<std::size_t>(i)] +
        base.alpha()[static_cast<std::size_t>(i)].times(n);
}

double base_distance(const RotationSystem& base, const TorusPoint& x,
                     const TorusPoint& y) {
  return raw_to_double(base_distance_raw(base, x, y));
}

uint128 base_distance_raw(const RotationSystem& base, const TorusPoint& x,
                          const TorusPoint& y) {
  check_point(base, x);
  check_point(base, y);
  uint128 worst = 0;
  for (int i = 0; i < base.dim(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    worst = std::max(worst, (x.coords[k] - y.coords[k]).dist_raw());
  }
  return worst;
}

void check_point(const RotationSystem& base, const TorusPoint& x) {
  if (x.dim() != base.dim())
    throw DimensionError("torus point has dimension " +
                         std::to_string(x.dim()) + ", base expects " +
                         std::to_string(base.dim()));
}

ContinuedFraction continued_fraction(Frac128 alpha, int depth) {
  if (depth < 1 || depth > 64)
    throw Error("continued fraction depth must be in [1, 64]");
  ContinuedFraction out;
  const uint128 v = alpha.raw();
  if (v == 0) {
    out.truncated = true;
    return out;
  }
  const uint128 all_ones = ~uint128(0);
  uint128 a = all_ones / v;
  uint128 rem = all_ones % v + 1;
  if (rem == v) {
    a += 1;
    rem = 0;
  }
  uint128 d_cur = v, d_next = rem;
  uint128 q_prev = 0, q_cur = 1;
  for (int k = 1; k <= depth; ++k) {
    if (a > static_cast<uint128>(kMaxIterate) / q_cur) {
      out.truncated = true;  // denominator leaves the usable integer range
      break;
    }
    const uint128 q_next = a * q_cur + q_prev;
    if (q_next > static_cast<uint128>(kMaxIterate)) {
      out.truncated = true;
      break;
    }
    ConvergentEntry e;
    e.a = a > static_cast<uint128>(UINT64_MAX)
              ? UINT64_MAX
              : static_cast<std::uint64_t>(a);
    e.q = static_cast<std::int64_t>(q_next);
    out.entries.push_back(e);
    q_prev = q_cur;
    q_cur = q_next;
    if (d_next == 0) {
      out.truncated = true;  // exact rational proxy ran out of precision
      break;
    }
    a = d_cur / d_next;
    const uint128 d_after = d_cur % d_next;
    d_cur = d_next;
    d_next = d_after;
  }
  return out;
}

ReturnTimes best_return_times(const RotationSystem& base, double eps,
                              std::int64_t max_n, std::size_t max_count) {
  if (max_n < 1 || max_n > kMaxIterate)
    throw Error("best_return_times: max_n out of range");
  ReturnTimes out;
  const uint128 eps_raw = eps_to_raw(eps);
  if (eps_raw == 0) return out;

  // Every distance is at most half a circle, so a threshold beyond that
  // accepts all n; emit the prefix directly.
  if (eps_raw > kHalfCircle) {
    const auto take = std::min<std::int64_t>(
        max_n, static_cast<std::int64_t>(max_count));
    out.times.resize(static_cast<std::size_t>(take));
    std::iota(out.times.begin(), out.times.end(), std::int64_t(1));
    out.truncated = take < max_n;
    return out;
  }

  const auto ladder = build_ladder(base.alpha()[0].raw(), max_n);
  DigitSearch search{ladder,
                     base.alpha(),
                     eps_raw,
                     max_n,
                     max_count,
                     std::max<std::int64_t>(
                         10'000'000, 64 * static_cast<std::int64_t>(max_count)),
                     {},
                     false,
                     {}};
  search.run(static_cast<int>(ladder.size()) - 1, 0, 0);
  std::sort(search.hits.begin(), search.hits.end());
  search.hits.erase(std::unique(search.hits.begin(), search.hits.end()),
                    search.hits.end());
  out.times = std::move(search.hits);
  out.truncated = search.truncated;
  return out;
}

ReturnTimes brute_force_return_times(const RotationSystem& base, double eps,
                                     std::int64_t max_n) {
  if (max_n < 1 || max_n > 10'000'000)
    throw BudgetError("brute_force_return_times caps max_n at 10^7", 0);
  ReturnTimes out;
  const uint128 eps_raw = eps_to_raw(eps);
  if (eps_raw == 0) return out;
  const int d = base.dim();
  std::vector<Frac128> r(static_cast<std::size_t>(d));
  for (std::int64_t n = 1; n <= max_n; ++n) {
    bool ok = true;
    for (int i = 0; i < d; ++i) {
      const auto k = static_cast<std::size_t>(i);
      r[k] = r[k] + base.alpha()[k];
      if (r[k].dist_raw() >= eps_raw) ok = false;
    }
    if (ok) out.times.push_back(n);
  }
  return out;
}

}  // namespace skewlab
