#include "skewlab/analyzer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <limits>
#include <numeric>
#include <utility>

#include "skewlab/error.hpp"

namespace skewlab {

namespace {

double delta_pts(const TorusPoint& a, const TorusPoint& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.coords.size(); ++i) {
    const Frac128 d = a.coords[i] - b.coords[i];
    worst = std::max(worst, raw_to_double(d.dist_raw()));
  }
  return worst;
}

double fiber_norm(const GroupInstance& G, const std::optional<SubgroupSpec>& H,
                  const GroupElement& g, GroupElement* reduced_out) {
  if (!H) {
    if (reduced_out) *reduced_out = g;
    return group_norm(G, g);
  }
  GroupElement rep = quotient_project(G, *H, g);
  const double n = group_norm(G, rep);
  if (reduced_out) *reduced_out = std::move(rep);
  return n;
}

double hausdorff_points(const GroupInstance& G,
                        const std::vector<GroupElement>& A,
                        const std::vector<GroupElement>& B) {
  if (A.empty() && B.empty()) return 0.0;
  if (A.empty() || B.empty())
    return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& a : A) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : B) best = std::min(best, group_distance(G, a, b));
    worst = std::max(worst, best);
  }
  for (const auto& b : B) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : A) best = std::min(best, group_distance(G, a, b));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

OrbitClosureSample sample_orbit_closure(const Cocycle& f, const SkewState& s0,
                                        std::int64_t N, const StridePlan& plan,
                                        const std::optional<SubgroupSpec>& H) {
  check_point(f.base(), s0.x);
  check_element(f.target(), s0.g);
  if (N < 0 || N > 1'000'000'000)
    throw Error("sample_orbit_closure: N must be in [0, 1e9]");
  if (plan.max_states < 1)
    throw Error("sample_orbit_closure: state cap must be positive");
  if (!(plan.coverage_grid > 0.0) || plan.coverage_grid > 0.5)
    throw Error("sample_orbit_closure: coverage grid must be in (0, 0.5]");
  if (plan.stride < 0) throw Error("sample_orbit_closure: negative stride");

  std::int64_t stride = plan.stride;
  std::int64_t K = 0;
  bool truncated = false;
  if (stride == 0) {
    stride = 1;
    if (N > 0 && 2 * N + 1 > plan.max_states) {
      // ceil(2N / (max_states - 1)): the smallest stride that fits the cap,
      // so the sample still reaches within one stride of both range ends
      const std::int64_t m = std::max<std::int64_t>(plan.max_states - 1, 1);
      stride = (2 * N + m - 1) / m;
    }
    K = N / stride;
  } else {
    K = N / stride;
    if (2 * K + 1 > plan.max_states) {
      K = (plan.max_states - 1) / 2;
      truncated = true;
    }
  }

  const GroupInstance& G = f.target();
  OrbitClosureSample out(G);
  out.H = H;
  out.coverage_grid = plan.coverage_grid;
  out.truncated = truncated;

  const std::size_t total = static_cast<std::size_t>(2 * K + 1);
  out.ns.reserve(total);
  out.states.reserve(total);
  if (H) out.reduced.reserve(total);

  // backward half collected outward, then reversed into ascending n
  {
    std::vector<std::int64_t> bns;
    std::vector<SkewState> bst;
    CocycleWalker bw(f, s0.x, -1);
    GroupElement val(G.dim());
    for (std::int64_t k = 1; k <= K; ++k) {
      bw.advance(stride);
      bw.value_into(val);
      bns.push_back(-k * stride);
      bst.push_back(SkewState{bw.point(), compose(G, val, s0.g)});
    }
    for (std::size_t i = bns.size(); i-- > 0;) {
      out.ns.push_back(bns[i]);
      out.states.push_back(std::move(bst[i]));
    }
  }
  out.ns.push_back(0);
  out.states.push_back(s0);
  {
    CocycleWalker fw(f, s0.x, 1);
    GroupElement val(G.dim());
    for (std::int64_t k = 1; k <= K; ++k) {
      fw.advance(stride);
      fw.value_into(val);
      out.ns.push_back(k * stride);
      out.states.push_back(SkewState{fw.point(), compose(G, val, s0.g)});
    }
  }

  const int dim = f.base().dim();
  const auto cells_per_dim =
      static_cast<std::int64_t>(std::ceil(1.0 / plan.coverage_grid));
  std::int64_t cells = 1;
  for (int i = 0; i < dim; ++i) {
    cells *= cells_per_dim;
    if (cells > 4'000'000)
      throw Error("sample_orbit_closure: coverage grid too fine for base dim");
  }
  out.coverage.assign(static_cast<std::size_t>(cells), 0);

  GroupElement rep;
  for (const SkewState& st : out.states) {
    std::int64_t idx = 0;
    for (int i = 0; i < dim; ++i) {
      auto c = static_cast<std::int64_t>(st.x.coords[i].to_double() *
                                         static_cast<double>(cells_per_dim));
      c = std::min(c, cells_per_dim - 1);
      idx = idx * cells_per_dim + c;
    }
    ++out.coverage[static_cast<std::size_t>(idx)];

    const double nrm = fiber_norm(G, H, st.g, H ? &rep : nullptr);
    out.running_radius = std::max(out.running_radius, nrm);
    if (H) out.reduced.push_back(rep);
  }
  return out;
}

OrbitClosureSample right_translate_sample(const OrbitClosureSample& sample,
                                          const GroupElement& h) {
  check_element(sample.group, h);
  OrbitClosureSample out = sample;
  out.running_radius = 0.0;
  GroupElement rep;
  for (std::size_t k = 0; k < out.states.size(); ++k) {
    out.states[k].g = compose(sample.group, out.states[k].g, h);
    const double nrm = fiber_norm(sample.group, sample.H, out.states[k].g,
                                  sample.H ? &rep : nullptr);
    if (sample.H) out.reduced[k] = rep;
    out.running_radius = std::max(out.running_radius, nrm);
  }
  return out;
}

double sample_hausdorff(const OrbitClosureSample& A,
                        const OrbitClosureSample& B, int max_points) {
  if (!(A.group == B.group))
    throw IncomparableEstimatesError(
        "orbit samples live in different groups: " + A.group.tag() + " vs " +
        B.group.tag());
  if (max_points < 1) throw Error("sample_hausdorff: need a positive cap");
  if (A.states.empty() && B.states.empty()) return 0.0;
  if (A.states.empty() || B.states.empty())
    return std::numeric_limits<double>::infinity();

  auto pick = [max_points](const OrbitClosureSample& S) {
    std::vector<const SkewState*> v;
    const std::size_t stride = std::max<std::size_t>(
        1, S.states.size() / static_cast<std::size_t>(max_points));
    for (std::size_t i = 0; i < S.states.size(); i += stride)
      v.push_back(&S.states[i]);
    return v;
  };
  const auto pa = pick(A);
  const auto pb = pick(B);

  auto dist = [&](const SkewState& a, const SkewState& b) {
    return std::max(delta_pts(a.x, b.x), group_distance(A.group, a.g, b.g));
  };
  double worst = 0.0;
  for (const auto* a : pa) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto* b : pb) best = std::min(best, dist(*a, *b));
    worst = std::max(worst, best);
  }
  for (const auto* b : pb) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto* a : pa) best = std::min(best, dist(*a, *b));
    worst = std::max(worst, best);
  }
  return worst;
}

double surjectivity_defect(const OrbitClosureSample& sample, double grid) {
  if (sample.states.empty())
    throw DegenerateInputError("surjectivity_defect: empty sample");
  if (!(grid > 0.0) || grid > 0.25)
    throw Error("surjectivity_defect: grid must be in (0, 0.25]");

  const int dim = static_cast<int>(sample.states[0].x.coords.size());
  const auto cpd = static_cast<std::int64_t>(std::ceil(1.0 / grid));
  const double width = 1.0 / static_cast<double>(cpd);
  std::int64_t cells = 1;
  for (int i = 0; i < dim; ++i) {
    cells *= cpd;
    if (cells > 4'000'000)
      throw Error("surjectivity_defect: grid too fine for base dim");
  }

  const std::size_t npts = sample.states.size();
  std::vector<double> coord(npts * static_cast<std::size_t>(dim));
  std::vector<std::vector<int>> bucket(static_cast<std::size_t>(cells));
  for (std::size_t k = 0; k < npts; ++k) {
    std::int64_t idx = 0;
    for (int i = 0; i < dim; ++i) {
      const double v = sample.states[k].x.coords[i].to_double();
      coord[k * dim + i] = v;
      auto c = static_cast<std::int64_t>(v * static_cast<double>(cpd));
      c = std::min(c, cpd - 1);
      idx = idx * cpd + c;
    }
    bucket[static_cast<std::size_t>(idx)].push_back(static_cast<int>(k));
  }

  auto wrap_abs = [](double d) {
    d = std::fabs(d);
    d -= std::floor(d);
    return std::min(d, 1.0 - d);
  };
  auto delta_to = [&](const std::vector<double>& center, int k) {
    double worst = 0.0;
    for (int i = 0; i < dim; ++i)
      worst = std::max(worst, wrap_abs(center[static_cast<std::size_t>(i)] -
                                       coord[static_cast<std::size_t>(k) * dim +
                                             static_cast<std::size_t>(i)]));
    return worst;
  };

  // offsets at Chebyshev ring m around a cell, wrapped
  std::vector<std::int64_t> cell_idx(static_cast<std::size_t>(dim), 0);
  std::vector<double> center(static_cast<std::size_t>(dim), 0.0);
  std::vector<std::int64_t> off(static_cast<std::size_t>(dim), 0);

  double defect = 0.0;
  const std::int64_t max_ring = cpd / 2 + 1;
  for (std::int64_t cell = 0; cell < cells; ++cell) {
    std::int64_t rem = cell;
    for (int i = dim - 1; i >= 0; --i) {
      cell_idx[static_cast<std::size_t>(i)] = rem % cpd;
      rem /= cpd;
    }
    for (int i = 0; i < dim; ++i)
      center[static_cast<std::size_t>(i)] =
          (static_cast<double>(cell_idx[static_cast<std::size_t>(i)]) + 0.5) *
          width;

    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t m = 0; m <= max_ring; ++m) {
      if (best <= (static_cast<double>(m) - 0.5) * width) break;
      // enumerate offsets with max|o_i| == m
      std::fill(off.begin(), off.end(), -m);
      while (true) {
        std::int64_t cheb = 0;
        for (int i = 0; i < dim; ++i)
          cheb = std::max<std::int64_t>(
              cheb, std::llabs(off[static_cast<std::size_t>(i)]));
        if (cheb == m) {
          std::int64_t idx = 0;
          for (int i = 0; i < dim; ++i) {
            std::int64_t c =
                (cell_idx[static_cast<std::size_t>(i)] +
                 off[static_cast<std::size_t>(i)] % cpd + cpd) %
                cpd;
            idx = idx * cpd + c;
          }
          for (int k : bucket[static_cast<std::size_t>(idx)])
            best = std::min(best, delta_to(center, k));
        }
        int d = dim - 1;
        while (d >= 0 && off[static_cast<std::size_t>(d)] == m) {
          off[static_cast<std::size_t>(d)] = -m;
          --d;
        }
        if (d < 0) break;
        ++off[static_cast<std::size_t>(d)];
      }
    }
    defect = std::max(defect, best);
  }
  return defect;
}

std::string to_string(GrowthVerdict v) {
  switch (v) {
    case GrowthVerdict::Bounded:
      return "bounded";
    case GrowthVerdict::Growing:
      return "growing";
    case GrowthVerdict::Inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

std::vector<ProfilePoint> compactness_profile(
    const OrbitClosureSample& sample, const SubgroupSpec& H,
    const std::vector<std::int64_t>& checkpoints) {
  if (checkpoints.empty())
    throw Error("compactness_profile: empty checkpoint list");
  std::int64_t prev = 0;
  for (std::int64_t c : checkpoints) {
    if (c <= prev)
      throw Error("compactness_profile: checkpoints must increase");
    prev = c;
  }

  // coset norm per sampled index, folded as a prefix max over |n|
  std::vector<std::pair<std::int64_t, double>> by_absn;
  by_absn.reserve(sample.states.size());
  for (std::size_t k = 0; k < sample.states.size(); ++k) {
    const GroupElement rep =
        quotient_project(sample.group, H, sample.states[k].g);
    by_absn.emplace_back(std::llabs(sample.ns[k]),
                         group_norm(sample.group, rep));
  }
  std::sort(by_absn.begin(), by_absn.end());

  std::vector<ProfilePoint> out;
  out.reserve(checkpoints.size());
  double run = 0.0;
  std::size_t i = 0;
  for (std::int64_t c : checkpoints) {
    while (i < by_absn.size() && by_absn[i].first <= c) {
      run = std::max(run, by_absn[i].second);
      ++i;
    }
    out.push_back(ProfilePoint{c, run});
  }
  return out;
}

GrowthVerdict classify_profile(const std::vector<ProfilePoint>& profile) {
  if (profile.size() < 2) return GrowthVerdict::Inconclusive;
  const double first = profile.front().radius;
  const double last = profile.back().radius;
  // Radius profiles are sups over growing prefixes, so they never decrease
  // and almost always creep up a little at each checkpoint. A tail that
  // stalls within 5% of the middle is stabilization evidence and must win
  // over the growth test, or every creeping profile would read as growing.
  const double mid =
      profile[profile.size() <= 2 ? 0 : profile.size() / 2].radius;
  if (last <= 1.05 * mid + 1e-12) return GrowthVerdict::Bounded;
  bool strictly_up = true;
  for (std::size_t i = 1; i < profile.size(); ++i)
    if (!(profile[i].radius > profile[i - 1].radius)) strictly_up = false;
  if (strictly_up && last >= 1.5 * first && last > 0.0)
    return GrowthVerdict::Growing;
  return GrowthVerdict::Inconclusive;
}

SetEstimate vertical_section(const OrbitClosureSample& sample,
                             const TorusPoint& x, double eta, double r,
                             double W) {
  if (!(eta > 0.0)) throw Error("vertical_section: eta must be positive");
  std::vector<GroupElement> cand;
  std::vector<PointOrigin> org;
  for (std::size_t k = 0; k < sample.states.size(); ++k) {
    if (delta_pts(sample.states[k].x, x) <= eta) {
      cand.push_back(sample.states[k].g);
      org.push_back(PointOrigin{sample.ns[k], 0, 0});
    }
  }
  SetEstimate out = build_estimate(sample.group, cand, org, r, W, "section");
  out.eta = eta;
  out.samples = 1;
  if (cand.empty()) {
    out.flags.no_return_times = true;
    out.note = "no sampled base points within eta of x";
  }
  return out;
}

double section_coset_defect(const SetEstimate& section,
                            const SubgroupSpec& H) {
  if (section.points.empty())
    throw DegenerateInputError("section_coset_defect: empty section");
  std::size_t anchor = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < section.points.size(); ++i) {
    const double n = group_norm(section.group, section.points[i]);
    if (n < best) {
      best = n;
      anchor = i;
    }
  }
  const GroupElement& p = section.points[anchor];
  double defect = 0.0;
  for (const auto& q : section.points)
    defect = std::max(defect, quotient_distance(section.group, H, p, q));
  return defect;
}

std::vector<ModulusPoint> gamma_modulus(
    const RotationSystem& base, const GroupInstance& G, const SubgroupSpec& H,
    const std::vector<std::pair<TorusPoint, GroupElement>>& anchors) {
  if (anchors.size() < 2)
    throw DegenerateInputError("gamma_modulus: need at least 2 anchors");
  std::size_t stride = 1;
  while ((anchors.size() / stride) * (anchors.size() / stride) > 500'000)
    ++stride;
  std::vector<ModulusPoint> out;
  for (std::size_t i = 0; i < anchors.size(); i += stride) {
    check_point(base, anchors[i].first);
    check_element(G, anchors[i].second);
    for (std::size_t j = i + stride; j < anchors.size(); j += stride) {
      out.push_back(ModulusPoint{
          base_distance(base, anchors[i].first, anchors[j].first),
          quotient_distance(G, H, anchors[i].second, anchors[j].second)});
    }
  }
  return out;
}

std::vector<ModulusPoint> modulus_envelope(std::vector<ModulusPoint> scatter) {
  std::sort(scatter.begin(), scatter.end(),
            [](const ModulusPoint& a, const ModulusPoint& b) {
              return a.base_dist < b.base_dist;
            });
  std::vector<ModulusPoint> out;
  double run = 0.0;
  for (const auto& p : scatter) {
    run = std::max(run, p.fiber_dist);
    if (!out.empty() && out.back().base_dist == p.base_dist)
      out.back().fiber_dist = run;
    else
      out.push_back(ModulusPoint{p.base_dist, run});
  }
  return out;
}

std::vector<StabilizerCandidate> stabilizer_candidates(
    const OrbitClosureSample& sample, const SetEstimate& probes) {
  if (sample.states.empty())
    throw DegenerateInputError("stabilizer_candidates: empty sample");
  if (!(sample.group == probes.group))
    throw IncomparableEstimatesError(
        "probes live in " + probes.group.tag() + ", sample in " +
        sample.group.tag());
  std::vector<StabilizerCandidate> out;
  out.reserve(probes.points.size());
  for (const auto& h : probes.points) {
    const OrbitClosureSample moved =
        right_translate_sample(sample, invert(sample.group, h));
    out.push_back(StabilizerCandidate{h, sample_hausdorff(sample, moved, 600)});
  }
  return out;
}

ComponentSplit connected_components(const SetEstimate& A, double scale) {
  if (A.points.empty())
    throw DegenerateInputError("connected_components: empty estimate");
  if (scale < A.r)
    throw Error("connected_components: scale below the dedup resolution");

  const int n = static_cast<int>(A.points.size());
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (group_distance(A.group, A.points[static_cast<std::size_t>(i)],
                         A.points[static_cast<std::size_t>(j)]) <= scale) {
        const int ri = find(i), rj = find(j);
        if (ri != rj) parent[static_cast<std::size_t>(rj)] = ri;
      }

  std::vector<int> root_order;
  std::vector<std::vector<int>> comps;
  for (int i = 0; i < n; ++i) {
    const int r = find(i);
    auto it = std::find(root_order.begin(), root_order.end(), r);
    std::size_t ci;
    if (it == root_order.end()) {
      root_order.push_back(r);
      comps.emplace_back();
      ci = comps.size() - 1;
    } else {
      ci = static_cast<std::size_t>(it - root_order.begin());
    }
    comps[ci].push_back(i);
  }

  ComponentSplit out;
  out.components = std::move(comps);
  for (std::size_t a = 0; a < out.components.size(); ++a)
    for (std::size_t b = a + 1; b < out.components.size(); ++b) {
      double gap = std::numeric_limits<double>::infinity();
      for (int i : out.components[a])
        for (int j : out.components[b])
          gap = std::min(gap,
                         group_distance(A.group,
                                        A.points[static_cast<std::size_t>(i)],
                                        A.points[static_cast<std::size_t>(j)]));
      out.gaps.push_back(gap);
    }
  std::sort(out.gaps.begin(), out.gaps.end());
  return out;
}

SelectionDefect consistent_selection_defect(
    const Cocycle& f, const SubgroupSpec& selection,
    const std::vector<std::pair<TorusPoint, std::int64_t>>& samples,
    const SetEstimate& E_at_x) {
  const GroupInstance& G = f.target();
  const auto kind = selection.kind();
  const bool ok =
      kind == SubgroupSpec::Kind::Trivial ||
      (kind == SubgroupSpec::Kind::CenterOfHeisenberg &&
       (G.kind() == GroupInstance::Kind::HeisenbergReal ||
        G.kind() == GroupInstance::Kind::HeisenbergDiscrete)) ||
      (kind == SubgroupSpec::Kind::VectorSubspace &&
       G.kind() == GroupInstance::Kind::RealVector);
  if (!ok)
    throw UnsupportedQuotientError(
        "consistent_selection_defect: selection " + selection.tag() +
        " is not supported on " + G.tag());
  if (!(E_at_x.group == G))
    throw IncomparableEstimatesError(
        "essential-range estimate lives in " + E_at_x.group.tag() +
        ", cocycle lands in " + G.tag());

  const double W = E_at_x.W;
  const double r = E_at_x.r;
  SearchGrid sg;
  sg.range = W;
  sg.step = std::max(r, W / 64.0);
  sg.max_points = 20'000;
  std::vector<GroupElement> cloud;
  for (auto& h : subgroup_grid(G, selection, sg))
    if (group_norm(G, h) <= W) cloud.push_back(std::move(h));

  SelectionDefect out;
  for (const auto& [x, n] : samples) {
    const GroupElement v = evaluate_cocycle(f, n, x);
    std::vector<GroupElement> moved;
    moved.reserve(cloud.size());
    for (const auto& h : cloud) {
      GroupElement c = conjugate(G, v, h);
      if (group_norm(G, c) <= W) moved.push_back(std::move(c));
    }
    out.conjugation =
        std::max(out.conjugation, hausdorff_points(G, cloud, moved));
  }

  for (const auto& h : cloud) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : E_at_x.points)
      best = std::min(best, group_distance(G, h, p));
    out.containment = std::max(out.containment, best);
  }
  return out;
}

nlohmann::json diagnostics_to_json(const DiagnosticsReport& report) {
  nlohmann::json j;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : report.entries)
    j["entries"].push_back({{"name", e.name},
                            {"value", e.value},
                            {"tolerance", e.tolerance},
                            {"pass", e.pass},
                            {"detail", e.detail}});
  j["profile"] = nlohmann::json::array();
  for (const auto& p : report.profile)
    j["profile"].push_back({{"N", p.N}, {"radius", p.radius}});
  j["profile_verdict"] = to_string(report.profile_verdict);
  j["gamma"] = nlohmann::json::array();
  for (const auto& m : report.gamma)
    j["gamma"].push_back({{"base", m.base_dist}, {"fiber", m.fiber_dist}});
  j["notes"] = report.notes;
  return j;
}

std::string diagnostics_to_text(const DiagnosticsReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-34s %14s %12s %6s\n", "diagnostic",
                "value", "tolerance", "pass");
  out += line;
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof(line), "%-34s %14.6g %12.6g %6s\n",
                  e.name.c_str(), e.value, e.tolerance,
                  e.pass ? "PASS" : "FAIL");
    out += line;
    if (!e.detail.empty()) {
      out += "    ";
      out += e.detail;
      out += '\n';
    }
  }
  if (!report.profile.empty()) {
    out += "radius profile (" + to_string(report.profile_verdict) + "):\n";
    for (const auto& p : report.profile) {
      std::snprintf(line, sizeof(line), "    N=%-10lld radius=%.6g\n",
                    static_cast<long long>(p.N), p.radius);
      out += line;
    }
  }
  for (const auto& n : report.notes) out += "note: " + n + "\n";
  return out;
}

}  // namespace skewlab
