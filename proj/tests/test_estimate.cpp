#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "skewlab/error.hpp"
#include "skewlab/estimate.hpp"

using namespace skewlab;

namespace {

RotationSystem golden_base() {
  return RotationSystem({Frac128::named("golden")}, AlphaTag::Golden);
}

TorusPoint pt1(const char* c) {
  return TorusPoint{{Frac128::from_decimal(c)}};
}

TrigSum sum1(std::int64_t freq, double amp, double phase = 0.0) {
  return TrigSum{{TrigTerm{{freq}, amp, phase}}, 0.0};
}

const std::vector<double> kEps = {0.05, 0.02, 0.01};

}  // namespace

TEST_SUITE("estimate") {

TEST_CASE("transient constant cocycle leaves the window empty") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::real_vector(1),
                  ConstantGen{[] {
                    GroupElement g(1);
                    g << 1.0;
                    return g;
                  }()});
  const auto P = estimate_P(f, pt1("0.3"), kEps, 100000, 0.05, 8.0);
  CHECK(P.points.empty());
  CHECK(P.flags.window_escape);
  CHECK_FALSE(P.flags.no_return_times);
  CHECK(P.provenance == "P-estimate");
  REQUIRE(P.level_counts.size() == kEps.size());
  CHECK(P.level_counts[0] > 0);
}

TEST_CASE("coboundary values cluster near the identity at return times") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::real_vector(1),
                  CoboundaryGen{{sum1(1, 0.5)}});
  const auto P = estimate_P(f, pt1("0.2"), kEps, 200000, 0.05, 8.0);
  REQUIRE_FALSE(P.points.empty());
  CHECK_FALSE(P.flags.no_return_times);
  for (const auto& p : P.points)
    CHECK(group_norm(P.group, p) <= 0.15);
}

TEST_CASE("anzai values fill the circle") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::torus(1), AnzaiGen{});
  const auto P = estimate_P(f, pt1("0.3"), kEps, 500000, 0.02, 8.0);
  REQUIRE(P.points.size() >= 10);
  // largest gap between sorted circle points is at most 3r
  std::vector<double> c;
  for (const auto& p : P.points) c.push_back(p[0]);
  std::sort(c.begin(), c.end());
  double gap = c.front() + 1.0 - c.back();
  for (std::size_t i = 1; i < c.size(); ++i)
    gap = std::max(gap, c[i] - c[i - 1]);
  CHECK(gap <= 3 * 0.02);
}

TEST_CASE("essential range sampling covers the circle too") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::torus(1), AnzaiGen{});
  const auto E = estimate_E(f, pt1("0.3"), 0.02, 0.05, 8, 200000, 0.02, 8.0, 1);
  REQUIRE(E.points.size() >= 10);
  CHECK(E.provenance == "E-estimate");
  CHECK(E.samples == 8);
  CHECK(E.eta == 0.05);
  std::vector<double> c;
  for (const auto& p : E.points) c.push_back(p[0]);
  std::sort(c.begin(), c.end());
  double gap = c.front() + 1.0 - c.back();
  for (std::size_t i = 1; i < c.size(); ++i)
    gap = std::max(gap, c[i] - c[i - 1]);
  CHECK(gap <= 3 * 0.02);
  // sample 0 is the configured point itself
  bool has_sample0 = false;
  for (const auto& o : E.origins) has_sample0 |= (o.sample == 0);
  CHECK(has_sample0);
}

TEST_CASE("kept points are pairwise separated and inside the window") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::heisenberg_real(),
                  HeisenbergLiftGen{sum1(1, 0.4), sum1(1, 0.4, -0.25)});
  const auto P = estimate_P(f, pt1("0.7"), kEps, 200000, 0.1, 2.0);
  REQUIRE(P.points.size() >= 2);
  for (std::size_t i = 0; i < P.points.size(); ++i) {
    CHECK(group_norm(P.group, P.points[i]) <= 2.0 + 1e-12);
    for (std::size_t j = i + 1; j < P.points.size(); ++j)
      CHECK(group_distance(P.group, P.points[i], P.points[j]) > 0.1);
  }
  CHECK(P.points.size() == P.origins.size());
}

TEST_CASE("same seed reproduces the estimate exactly") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::torus(1), AnzaiGen{});
  const auto A = estimate_E(f, pt1("0.3"), 0.02, 0.05, 6, 100000, 0.05, 8.0, 42);
  const auto B = estimate_E(f, pt1("0.3"), 0.02, 0.05, 6, 100000, 0.05, 8.0, 42);
  REQUIRE(A.points.size() == B.points.size());
  for (std::size_t i = 0; i < A.points.size(); ++i)
    CHECK(A.points[i] == B.points[i]);
  const auto C = estimate_E(f, pt1("0.3"), 0.02, 0.05, 6, 100000, 0.05, 8.0, 43);
  CHECK(hausdorff_distance(A, C) <= 2 * 0.05);
}

TEST_CASE("hausdorff distance edge cases") {
  const auto G = GroupInstance::real_vector(1);
  SetEstimate A(G), B(G);
  A.r = B.r = 0.1;
  A.W = B.W = 4.0;
  CHECK(hausdorff_distance(A, B) == 0.0);
  GroupElement g(1);
  g << 1.0;
  A.points.push_back(g);
  CHECK(std::isinf(hausdorff_distance(A, B)));
  GroupElement h(1);
  h << 1.5;
  B.points.push_back(h);
  CHECK(hausdorff_distance(A, B) == doctest::Approx(0.5).epsilon(1e-12));
  SetEstimate C(GroupInstance::torus(1));
  C.W = 4.0;
  CHECK_THROWS_AS(hausdorff_distance(A, C), IncomparableEstimatesError);
  SetEstimate D(G);
  D.W = 2.0;
  CHECK_THROWS_AS(hausdorff_distance(A, D), IncomparableEstimatesError);
}

TEST_CASE("conjugating a set moves points and widens the window") {
  const auto G = GroupInstance::heisenberg_real();
  SetEstimate A(G);
  A.r = 0.05;
  A.W = 2.0;
  A.provenance = "P-estimate";
  GroupElement p(3);
  p << 1.0, 0.0, 0.0;
  A.points.push_back(p);
  A.origins.push_back({});
  GroupElement c(3);
  c << 0.0, 1.0, 0.0;
  const auto B = conjugate_set(A, c);
  REQUIRE(B.points.size() == 1);
  CHECK(B.points[0][0] == 1.0);
  CHECK(B.points[0][1] == 0.0);
  CHECK(B.points[0][2] == -1.0);
  CHECK(B.W >= A.W);
  CHECK(B.provenance == "derived");
  // abelian case: conjugation is the identity map
  SetEstimate V(GroupInstance::real_vector(1));
  V.r = 0.05;
  V.W = 2.0;
  GroupElement q(1);
  q << 0.75;
  V.points.push_back(q);
  V.origins.push_back({});
  GroupElement s(1);
  s << 5.0;
  const auto VB = conjugate_set(V, s);
  CHECK(VB.points[0][0] == 0.75);
  CHECK(VB.W == V.W);
}

TEST_CASE("inverting a set keeps the window and flags escapes") {
  const auto G = GroupInstance::heisenberg_real();
  SetEstimate A(G);
  A.r = 0.05;
  // N(2,2,0.1) = (64+0.01)^(1/4) ~ 2.829; the inverse is (-2,-2,3.9) with
  // N = (64+15.21)^(1/4) ~ 2.983: an in-window point whose inverse sticks out
  A.W = 2.9;
  GroupElement p(3);
  p << 2.0, 2.0, 0.1;
  A.points.push_back(p);
  A.origins.push_back({});
  GroupElement ok(3);
  ok << 0.5, 0.0, 0.0;
  A.points.push_back(ok);
  A.origins.push_back({});
  REQUIRE(group_norm(G, p) <= A.W);
  REQUIRE(group_norm(G, invert(G, p)) > A.W);
  const auto B = invert_set(A);
  CHECK(B.W == A.W);
  CHECK(B.points.size() == 1);
  CHECK(B.points[0][0] == -0.5);
  CHECK(B.flags.window_escape);
}

TEST_CASE("semigroup defect sees closure and its absence") {
  const auto G = GroupInstance::real_vector(1);
  SetEstimate A(G);
  A.r = 0.1;
  A.W = 1.5;
  A.provenance = "P-estimate";
  for (const double v : {0.0, 1.0}) {
    GroupElement g(1);
    g << v;
    A.points.push_back(g);
    A.origins.push_back({});
  }
  // products within W - r: 0+0, 0+1, 1+0 -> all present
  const auto d = semigroup_defect(A);
  REQUIRE(d.has_value());
  CHECK(*d == doctest::Approx(0.0).epsilon(1e-12));

  SetEstimate S(G);
  S.r = 0.1;
  S.W = 3.0;
  S.provenance = "P-estimate";
  GroupElement one(1);
  one << 1.0;
  S.points.push_back(one);
  S.origins.push_back({});
  // 1+1 = 2 is inside the probe region but far from the only point
  const auto ds = semigroup_defect(S);
  REQUIRE(ds.has_value());
  CHECK(*ds == doctest::Approx(1.0).epsilon(1e-12));

  SetEstimate E(G);
  E.r = 0.1;
  E.W = 1.0;
  E.provenance = "P-estimate";
  CHECK_FALSE(semigroup_defect(E).has_value());

  SetEstimate D(G);
  D.r = 0.1;
  D.W = 1.0;
  D.provenance = "derived";
  CHECK_THROWS_AS(semigroup_defect(D), Error);
}

TEST_CASE("window clipping drops outer points and flags the loss") {
  const auto G = GroupInstance::real_vector(1);
  SetEstimate A(G);
  A.r = 0.1;
  A.W = 4.0;
  for (const double v : {0.5, 3.5}) {
    GroupElement g(1);
    g << v;
    A.points.push_back(g);
    A.origins.push_back({});
  }
  const auto B = clip_to_window(A, 2.0);
  CHECK(B.W == 2.0);
  REQUIRE(B.points.size() == 1);
  CHECK(B.points[0][0] == 0.5);
  CHECK(B.flags.window_escape);
  CHECK(B.origins.size() == 1);
  const auto C = clip_to_window(A, 4.0);
  CHECK(C.points.size() == 2);
  CHECK_FALSE(C.flags.window_escape);
}

TEST_CASE("build_estimate dedups greedily in order") {
  const auto G = GroupInstance::real_vector(1);
  std::vector<GroupElement> cand;
  std::vector<PointOrigin> orig;
  for (const double v : {0.0, 0.05, 0.3, 5.0}) {
    GroupElement g(1);
    g << v;
    cand.push_back(g);
    orig.push_back({static_cast<std::int64_t>(cand.size()), 0, 1});
  }
  const auto est = build_estimate(G, cand, orig, 0.1, 2.0, "section");
  REQUIRE(est.points.size() == 2);
  CHECK(est.points[0][0] == 0.0);   // 0.05 collapsed into it
  CHECK(est.points[1][0] == 0.3);
  CHECK(est.flags.window_escape);   // 5.0 clipped
  CHECK(est.origins[0].n == 1);
  CHECK_THROWS_AS(
      build_estimate(G, cand, std::vector<PointOrigin>{}, 0.1, 2.0, "x"),
      Error);
}

TEST_CASE("deeper levels require recurrence across the schedule") {
  const auto base = golden_base();
  // every kept point must have survived into a schedule level, and its
  // producing return time must sit inside the scanned range
  const Cocycle f(base, GroupInstance::real_vector(1),
                  CoboundaryGen{{sum1(1, 1.5)}});
  const auto P = estimate_P(f, pt1("0.4"), kEps, 300000, 0.02, 6.0);
  REQUIRE_FALSE(P.points.empty());
  for (const auto& o : P.origins) CHECK(o.level >= 1);
  for (const auto& o : P.origins) CHECK(std::llabs(o.n) <= 300000);
  CHECK(P.eps_schedule == kEps);
  CHECK(P.N == 300000);
}

TEST_CASE("invalid estimator parameters are rejected") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::torus(1), AnzaiGen{});
  const auto x = pt1("0.3");
  CHECK_THROWS_AS(estimate_P(f, x, {0.02, 0.05}, 1000, 0.05, 8.0), Error);
  CHECK_THROWS_AS(estimate_P(f, x, {}, 1000, 0.05, 8.0), Error);
  CHECK_THROWS_AS(estimate_P(f, x, kEps, 0, 0.05, 8.0), Error);
  CHECK_THROWS_AS(estimate_P(f, x, kEps, 1000, -0.05, 8.0), Error);
  CHECK_THROWS_AS(estimate_P(f, x, kEps, 1000, 0.05, 0.0), Error);
  CHECK_THROWS_AS(estimate_E(f, x, 0.05, 0.1, 0, 1000, 0.05, 8.0, 1), Error);
}

}  // TEST_SUITE
