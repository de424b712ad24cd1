#include "skewlab/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

/// max_i ||n alpha_i|| in raw ticks; the same integer predicate the return
/// time search uses, so level assignment is exact.
uint128 residue_raw(const RotationSystem& base, std::int64_t n) {
  uint128 worst = 0;
  for (const auto& a : base.alpha()) {
    const uint128 d = a.times(n).dist_raw();
    if (d > worst) worst = d;
  }
  return worst;
}

/// Streaming r-dedup per eps level. Candidates more than r beyond the window
/// are discarded outright; the band (W, W+r] is kept so near-window points
/// still have their stability partners.
struct Collector {
  const GroupInstance* G = nullptr;
  double r = 0.0;
  double W = 0.0;
  std::vector<std::vector<GroupElement>> kept;
  std::vector<std::vector<PointOrigin>> kept_origin;
  std::vector<std::int64_t> raw_counts;
  std::int64_t escaped = 0;

  Collector(const GroupInstance& g, int levels, double r_, double W_)
      : G(&g),
        r(r_),
        W(W_),
        kept(levels),
        kept_origin(levels),
        raw_counts(levels, 0) {}

  void offer(const GroupElement& v, std::int64_t n, int sample, int deepest) {
    for (int k = 0; k < deepest; ++k) ++raw_counts[k];
    const double norm = group_norm(*G, v);
    if (norm > W) {
      ++escaped;
      if (norm > W + r) return;
    }
    for (int k = 0; k < deepest; ++k) {
      bool dup = false;
      for (const auto& p : kept[k])
        if (group_distance(*G, p, v) <= r) {
          dup = true;
          break;
        }
      if (!dup) {
        kept[k].push_back(v);
        kept_origin[k].push_back(PointOrigin{n, sample, k + 1});
      }
    }
  }
};

void walk_collect(const Cocycle& f, const TorusPoint& y, int sample,
                  const std::vector<std::int64_t>& hits,
                  const std::vector<int>& deepest, Collector& C) {
  if (hits.empty()) return;
  CocycleWalker fw(f, y, 1);
  CocycleWalker bw(f, y, -1);
  GroupElement val(f.target().dim());
  std::size_t hi = 0;
  const std::int64_t last = hits.back();
  for (std::int64_t n = 1; n <= last; ++n) {
    fw.step();
    bw.step();
    if (hi < hits.size() && n == hits[hi]) {
      fw.value_into(val);
      C.offer(val, n, sample, deepest[hi]);
      bw.value_into(val);
      C.offer(val, -n, sample, deepest[hi]);
      ++hi;
    }
  }
}

void check_common(const std::vector<double>& eps_schedule, std::int64_t N,
                  double r, double W) {
  if (eps_schedule.empty()) throw Error("estimate: empty eps schedule");
  double prev = std::numeric_limits<double>::infinity();
  for (double e : eps_schedule) {
    if (!(e > 0.0)) throw Error("estimate: eps values must be positive");
    if (!(e < prev))
      throw Error("estimate: eps schedule must be strictly decreasing");
    prev = e;
  }
  if (N < 1 || N > 1'000'000'000)
    throw Error("estimate: N must be in [1, 1e9]");
  if (!(r > 0.0)) throw Error("estimate: resolution r must be positive");
  if (!(W > 0.0)) throw Error("estimate: window W must be positive");
}

}  // namespace

SetEstimate build_estimate(const GroupInstance& G,
                           const std::vector<GroupElement>& candidates,
                           const std::vector<PointOrigin>& origins, double r,
                           double W, const std::string& provenance) {
  if (candidates.size() != origins.size())
    throw DimensionError("build_estimate: candidate/origin lists differ");
  if (!(r > 0.0) || !(W > 0.0))
    throw Error("build_estimate: r and W must be positive");
  SetEstimate out{G};
  out.r = r;
  out.W = W;
  out.provenance = provenance;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const GroupElement& v = candidates[i];
    if (group_norm(G, v) > W) {
      out.flags.window_escape = true;
      continue;
    }
    bool dup = false;
    for (const auto& p : out.points)
      if (group_distance(G, p, v) <= r) {
        dup = true;
        break;
      }
    if (!dup) {
      out.points.push_back(v);
      out.origins.push_back(origins[i]);
    }
  }
  return out;
}

SetEstimate estimate_P(const Cocycle& f, const TorusPoint& x,
                       const std::vector<double>& eps_schedule,
                       std::int64_t N, double r, double W) {
  check_point(f.base(), x);
  check_common(eps_schedule, N, r, W);
  const int K = static_cast<int>(eps_schedule.size());

  const ReturnTimes rt = best_return_times(f.base(), eps_schedule[0], N);
  std::vector<uint128> eraw(K);
  for (int k = 0; k < K; ++k) eraw[k] = eps_to_raw(eps_schedule[k]);
  std::vector<int> deepest(rt.times.size());
  for (std::size_t i = 0; i < rt.times.size(); ++i) {
    const uint128 res = residue_raw(f.base(), rt.times[i]);
    int d = 0;
    while (d < K && res < eraw[d]) ++d;
    deepest[i] = d;
  }

  Collector C(f.target(), K, r, W);
  walk_collect(f, x, 0, rt.times, deepest, C);

  // Return times nest as eps shrinks, so "seen at two consecutive levels"
  // reduces to: everything at level 2, plus level-1 points with a level-2
  // partner within r. A single-level schedule keeps level 1 as is.
  std::vector<GroupElement> pool;
  std::vector<PointOrigin> porg;
  if (K == 1) {
    pool = C.kept[0];
    porg = C.kept_origin[0];
  } else {
    pool = C.kept[1];
    porg = C.kept_origin[1];
    for (std::size_t i = 0; i < C.kept[0].size(); ++i) {
      for (const auto& q : C.kept[1])
        if (group_distance(f.target(), C.kept[0][i], q) <= r) {
          pool.push_back(C.kept[0][i]);
          porg.push_back(C.kept_origin[0][i]);
          break;
        }
    }
  }

  SetEstimate out = build_estimate(f.target(), pool, porg, r, W, "P-estimate");
  out.flags.no_return_times = rt.times.empty();
  out.flags.window_escape = C.escaped > 0;
  out.flags.truncated = rt.truncated;
  out.eps_schedule = eps_schedule;
  out.N = N;
  out.samples = 1;
  out.level_counts = C.raw_counts;
  return out;
}

SetEstimate estimate_E(const Cocycle& f, const TorusPoint& x, double eps,
                       double eta, int m, std::int64_t N, double r, double W,
                       std::uint64_t seed) {
  check_point(f.base(), x);
  check_common({eps}, N, r, W);
  if (!(eta > 0.0)) throw Error("estimate: eta must be positive");
  if (m < 1) throw Error("estimate: need at least one base sample");

  const ReturnTimes rt = best_return_times(f.base(), eps, N);
  const std::vector<int> deepest(rt.times.size(), 1);

  Collector C(f.target(), 1, r, W);
  std::mt19937_64 eng(seed);
  for (int s = 0; s < m; ++s) {
    TorusPoint y = x;
    if (s > 0) {
      for (auto& c : y.coords) {
        const double d = (2.0 * uniform01(eng) - 1.0) * eta;
        double sh = d - std::floor(d);
        if (sh >= 1.0) sh = 0.0;
        c = c + Frac128::from_double(sh);
      }
    }
    walk_collect(f, y, s, rt.times, deepest, C);
  }

  SetEstimate out = build_estimate(f.target(), C.kept[0], C.kept_origin[0], r,
                                   W, "E-estimate");
  out.flags.no_return_times = rt.times.empty();
  out.flags.window_escape = C.escaped > 0;
  out.flags.truncated = rt.truncated;
  out.eps_schedule = {eps};
  out.N = N;
  out.eta = eta;
  out.samples = m;
  out.level_counts = C.raw_counts;
  return out;
}

double hausdorff_distance(const SetEstimate& A, const SetEstimate& B) {
  if (!(A.group == B.group))
    throw IncomparableEstimatesError(
        "set estimates live in different groups: " + A.group.tag() + " vs " +
        B.group.tag());
  if (A.W != B.W)
    throw IncomparableEstimatesError(
        "set estimates have different windows: " + std::to_string(A.W) +
        " vs " + std::to_string(B.W));
  if (A.points.empty() && B.points.empty()) return 0.0;
  if (A.points.empty() || B.points.empty())
    return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& a : A.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : B.points)
      best = std::min(best, group_distance(A.group, a, b));
    worst = std::max(worst, best);
  }
  for (const auto& b : B.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : A.points)
      best = std::min(best, group_distance(A.group, a, b));
    worst = std::max(worst, best);
  }
  return worst;
}

namespace {

double conj_window(const GroupInstance& G, const GroupElement& g, double W,
                   int offset) {
  switch (G.kind()) {
    case GroupInstance::Kind::RealVector:
    case GroupInstance::Kind::IntegerLattice:
    case GroupInstance::Kind::Torus:
      return W;
    case GroupInstance::Kind::HeisenbergReal:
    case GroupInstance::Kind::HeisenbergDiscrete: {
      // Conjugating (a,b,c) by (x,y,.) moves c by x b - y a, so a point at
      // gauge W (planar radius <= W, |c| <= W^2) lands within this bound.
      const double s =
          std::fabs(g[offset]) + std::fabs(g[offset + 1]);
      const double c = W * W + s * W;
      const double p = W * W;
      return std::pow(p * p + c * c, 0.25);
    }
    case GroupInstance::Kind::DirectProduct: {
      double worst = W;
      for (std::size_t i = 0; i < G.factors().size(); ++i)
        worst = std::max(worst, conj_window(G.factors()[i], g, W,
                                            offset + G.factor_offset(i)));
      return worst;
    }
  }
  return W;
}

std::string fmt_short(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

SetEstimate conjugate_set(const SetEstimate& A, const GroupElement& g) {
  check_element(A.group, g);
  SetEstimate out = A;
  for (auto& p : out.points) p = conjugate(A.group, g, p);
  out.W = conj_window(A.group, g, A.W, 0);
  out.provenance = "derived";
  out.note = "conjugated; window " + fmt_short(A.W) + " -> " +
             fmt_short(out.W);
  return out;
}

SetEstimate invert_set(const SetEstimate& A) {
  SetEstimate out = A;
  out.points.clear();
  out.origins.clear();
  std::int64_t dropped = 0;
  for (std::size_t i = 0; i < A.points.size(); ++i) {
    GroupElement q = invert(A.group, A.points[i]);
    if (group_norm(A.group, q) > A.W) {
      ++dropped;
      continue;
    }
    out.points.push_back(std::move(q));
    out.origins.push_back(A.origins[i]);
  }
  out.provenance = "derived";
  if (dropped > 0) {
    out.flags.window_escape = true;
    out.note = std::to_string(dropped) + " inverted points left the window";
  }
  return out;
}

std::optional<double> semigroup_defect(const SetEstimate& A) {
  if (A.provenance != "P-estimate")
    throw Error("semigroup defect is defined for P-estimates, got " +
                (A.provenance.empty() ? std::string("(unset)") : A.provenance));
  if (A.points.empty()) return std::nullopt;
  double defect = 0.0;
  for (const auto& a : A.points) {
    for (const auto& b : A.points) {
      const GroupElement prod = compose(A.group, a, b);
      if (group_norm(A.group, prod) > A.W - A.r) continue;
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& p : A.points)
        nearest = std::min(nearest, group_distance(A.group, prod, p));
      defect = std::max(defect, nearest);
    }
  }
  return defect;
}

SetEstimate clip_to_window(const SetEstimate& A, double w) {
  if (!(w > 0.0)) throw Error("clip_to_window: window must be positive");
  SetEstimate out = A;
  out.W = w;
  out.points.clear();
  out.origins.clear();
  std::int64_t dropped = 0;
  for (std::size_t i = 0; i < A.points.size(); ++i) {
    if (group_norm(A.group, A.points[i]) > w) {
      ++dropped;
      continue;
    }
    out.points.push_back(A.points[i]);
    out.origins.push_back(A.origins[i]);
  }
  if (dropped > 0) {
    out.flags.window_escape = true;
    out.note += (out.note.empty() ? "" : "; ");
    out.note += "clipped " + std::to_string(dropped) + " points to window " +
                fmt_short(w);
  }
  return out;
}

}  // namespace skewlab
