#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "skewlab/cocycle.hpp"
#include "skewlab/group.hpp"
#include "skewlab/rotation.hpp"

namespace skewlab {

/// Where a stored point came from: the return time n that produced it, the
/// base-sample index (0 is the configured x itself), and the 1-based eps
/// schedule level (0 for points of derived sets).
struct PointOrigin {
  std::int64_t n = 0;
  int sample = 0;
  int level = 0;
};

struct EstimateFlags {
  bool no_return_times = false;  // recurrence not observed at this eps / N
  bool window_escape = false;    // returns found but values left the window
  bool truncated = false;        // a budget clipped the underlying scan
};

/// Finite inner approximation of a closed subset of the value group,
/// confined to the ball of radius W around the identity and deduplicated at
/// resolution r (kept points are pairwise more than r apart, so never closer
/// than r/2 to a dropped candidate's representative).
struct SetEstimate {
  explicit SetEstimate(GroupInstance g) : group(std::move(g)) {}

  GroupInstance group;
  std::vector<GroupElement> points;
  std::vector<PointOrigin> origins;  // parallel to points
  double r = 0.0;
  double W = 0.0;
  std::string provenance;  // "P-estimate", "E-estimate", "section", "derived"
  EstimateFlags flags;

  // Parameters that produced the estimate, echoed for reports.
  std::vector<double> eps_schedule;
  std::int64_t N = 0;
  double eta = 0.0;
  int samples = 0;
  std::vector<std::int64_t> level_counts;  // raw candidates per eps level
  std::string note;  // extra derivation detail (conjugator, clipping, ...)
};

/// Deterministic 53-bit uniform draw in [0,1) (the distribution-object
/// wrappers are implementation-defined; this is reproducible everywhere).
inline double uniform01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

/// Recurrent-limit set estimate: values f(n, x) along return times
/// |n| <= N with base residue < eps, per schedule level. A point is kept
/// when it recurs (within r) across two consecutive schedule levels; the
/// kept cloud is deduplicated at r and clipped to the window W.
SetEstimate estimate_P(const Cocycle& f, const TorusPoint& x,
                       const std::vector<double>& eps_schedule,
                       std::int64_t N, double r, double W);

/// Essential-range estimate: same collection run from m base points y in
/// the eta-ball around x (sample 0 is x itself, the rest are seeded), one
/// eps level. The y-sampling realizes the neighbourhood quantifier in the
/// definition the estimate approximates from inside.
SetEstimate estimate_E(const Cocycle& f, const TorusPoint& x, double eps,
                       double eta, int m, std::int64_t N, double r, double W,
                       std::uint64_t seed);

/// Max of the two directed sup-inf cloud distances. Requires the same group
/// and the same window; both empty gives 0, exactly one empty gives +inf.
double hausdorff_distance(const SetEstimate& A, const SetEstimate& B);

/// Pointwise g . a . g^{-1}. The window grows to the distortion bound of
/// conjugation over the original window (noted in `note`); clip afterwards
/// when comparing against an unconjugated estimate.
SetEstimate conjugate_set(const SetEstimate& A, const GroupElement& g);

/// Pointwise inverse. The window is kept; inverted points that leave it are
/// dropped and flagged (the gauge is not inversion-symmetric on Heisenberg).
SetEstimate invert_set(const SetEstimate& A);

/// Max over pairs (a, b) in A^2 whose product stays within W - r of the
/// distance from a . b to the nearest stored point. Evidence for closure
/// under composition. Empty estimate -> nullopt.
std::optional<double> semigroup_defect(const SetEstimate& A);

/// Copy of A with window w and points outside dropped (flagged when any).
SetEstimate clip_to_window(const SetEstimate& A, double w);

/// Shared assembly path: greedy r-dedup of candidates in order, clip to W.
/// Used by the estimators above and by the orbit-section diagnostics.
SetEstimate build_estimate(const GroupInstance& G,
                           const std::vector<GroupElement>& candidates,
                           const std::vector<PointOrigin>& origins, double r,
                           double W, const std::string& provenance);

}  // namespace skewlab
