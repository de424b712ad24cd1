#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "skewlab/cocycle.hpp"
#include "skewlab/estimate.hpp"
#include "skewlab/group.hpp"
#include "skewlab/rotation.hpp"

namespace skewlab {

/// Index set for orbit sampling: n = 0, +-stride, +-2*stride, ... capped at
/// max_states stored states. stride 0 picks the smallest stride that covers
/// [-N, N] within the cap. coverage_grid is the base histogram cell width.
struct StridePlan {
  std::int64_t stride = 0;
  std::int64_t max_states = 200'001;
  double coverage_grid = 0.05;
};

/// Orbit sample of the skew product through (x0, g0). states[k] holds
/// T_f^{n_k}(x0, g0) with ns[k] the signed time; when H is set, reduced[k]
/// is the canonical coset representative of the fiber component mod H.
struct OrbitClosureSample {
  explicit OrbitClosureSample(GroupInstance g) : group(std::move(g)) {}

  GroupInstance group;
  std::vector<std::int64_t> ns;
  std::vector<SkewState> states;
  std::optional<SubgroupSpec> H;
  std::vector<GroupElement> reduced;  // parallel to states when H is set

  double running_radius = 0.0;  // sup distance(1, fiber component mod H)
  std::vector<std::int64_t> coverage;  // base-cell occupancy histogram
  double coverage_grid = 0.05;
  bool truncated = false;  // the cap clipped the requested index range
};

OrbitClosureSample sample_orbit_closure(
    const Cocycle& f, const SkewState& s0, std::int64_t N,
    const StridePlan& plan = {},
    const std::optional<SubgroupSpec>& H = std::nullopt);

/// Right translation R_h(x, g) = (x, g h) applied to every sampled state.
OrbitClosureSample right_translate_sample(const OrbitClosureSample& sample,
                                          const GroupElement& h);

/// Hausdorff distance between two sampled clouds in X x G under
/// max(base delta, group distance), each cloud subsampled down to at most
/// max_points states (uniform stride, deterministic).
double sample_hausdorff(const OrbitClosureSample& A,
                        const OrbitClosureSample& B, int max_points = 1500);

/// Max over the cells of a width-`grid` partition of X of the delta
/// distance from the cell center to the nearest sampled base point.
/// A defect <= grid certifies that the base projection is grid-dense.
double surjectivity_defect(const OrbitClosureSample& sample, double grid);

struct ProfilePoint {
  std::int64_t N = 0;
  double radius = 0.0;
};

enum class GrowthVerdict { Bounded, Growing, Inconclusive };

std::string to_string(GrowthVerdict v);

/// radius(N) = sup over sampled |n| <= N of the coset norm of the fiber
/// component mod H. Bounded or stabilizing profiles are compactness
/// evidence; growth past every checkpoint is transience evidence.
std::vector<ProfilePoint> compactness_profile(
    const OrbitClosureSample& sample, const SubgroupSpec& H,
    const std::vector<std::int64_t>& checkpoints);

/// Bounded when the tail stops moving (last <= 1.05 * mid), Growing when the
/// profile increases at every checkpoint and at least 1.5-fold overall.
GrowthVerdict classify_profile(const std::vector<ProfilePoint>& profile);

/// Fiber components of sampled states whose base point lies within eta of
/// x, deduplicated at r and clipped to window W (provenance "section").
/// No nearby base points gives an empty estimate with the no-data flag set.
SetEstimate vertical_section(const OrbitClosureSample& sample,
                             const TorusPoint& x, double eta, double r,
                             double W);

/// Anchors the section at its point p closest to the window center and
/// returns max over section points q of the coset distance between p^{-1} q
/// and the identity mod H. Small defect = single-coset evidence.
double section_coset_defect(const SetEstimate& section, const SubgroupSpec& H);

struct ModulusPoint {
  double base_dist = 0.0;
  double fiber_dist = 0.0;
};

/// Scatter of base distance vs coset distance over all anchor pairs; the
/// empirical modulus of continuity of the section-anchor map.
std::vector<ModulusPoint> gamma_modulus(
    const RotationSystem& base, const GroupInstance& G, const SubgroupSpec& H,
    const std::vector<std::pair<TorusPoint, GroupElement>>& anchors);

/// Upper envelope: points sorted by base distance with cumulative max fiber
/// distance, deduplicated per base distance.
std::vector<ModulusPoint> modulus_envelope(std::vector<ModulusPoint> scatter);

struct StabilizerCandidate {
  GroupElement h;
  double defect = 0.0;
};

/// For each probe h, the Hausdorff defect between the sampled cloud and its
/// right translate by h^{-1}; small defect marks h as an approximate
/// stabilizer element of the orbit closure.
std::vector<StabilizerCandidate> stabilizer_candidates(
    const OrbitClosureSample& sample, const SetEstimate& probes);

struct ComponentSplit {
  std::vector<std::vector<int>> components;  // indices into the estimate
  std::vector<double> gaps;  // pairwise inter-component gaps, ascending
};

/// Single-linkage partition at the given scale (points linked when within
/// scale, transitively closed). Components are ordered by smallest member
/// index.
ComponentSplit connected_components(const SetEstimate& A, double scale);

struct SelectionDefect {
  double conjugation = 0.0;  // H_{T^n x} vs f(n,x) H_x f(n,x)^{-1}
  double containment = 0.0;  // H_x against the essential-range estimate
};

/// Defect of a constant subgroup selection x -> H under the conjugation
/// consistency rule, probed at the given (x, n) samples, plus the
/// containment defect of H's generator cloud against E (windowed at E.W,
/// sampled at resolution E.r). Supported selections: trivial on any group,
/// center on Heisenberg, vector subspace on RealVector.
SelectionDefect consistent_selection_defect(
    const Cocycle& f, const SubgroupSpec& selection,
    const std::vector<std::pair<TorusPoint, std::int64_t>>& samples,
    const SetEstimate& E_at_x);

struct Diagnostic {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// Named scalars plus the structured series behind them. Every scalar
/// carries the tolerance it was compared against.
struct DiagnosticsReport {
  std::vector<Diagnostic> entries;
  std::vector<ProfilePoint> profile;
  GrowthVerdict profile_verdict = GrowthVerdict::Inconclusive;
  std::vector<ModulusPoint> gamma;
  std::vector<std::string> notes;
};

nlohmann::json diagnostics_to_json(const DiagnosticsReport& report);
std::string diagnostics_to_text(const DiagnosticsReport& report);

}  // namespace skewlab
