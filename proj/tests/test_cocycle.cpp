#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "skewlab/cocycle.hpp"
#include "skewlab/error.hpp"

using namespace skewlab;

namespace {

RotationSystem golden_base() {
  return RotationSystem({Frac128::named("golden")}, AlphaTag::Golden);
}

TorusPoint pt(std::initializer_list<const char*> coords) {
  TorusPoint x;
  for (const char* c : coords) x.coords.push_back(Frac128::from_decimal(c));
  return x;
}

TrigSum sum1(std::int64_t freq, double amp, double phase = 0.0) {
  return TrigSum{{TrigTerm{{freq}, amp, phase}}, 0.0};
}

double circle_gap(double a, double b) {
  double d = std::abs(a - b);
  d -= std::floor(d);
  return std::min(d, 1.0 - d);
}

}  // namespace

TEST_SUITE("cocycle") {

TEST_CASE("registry rejects unknown tags with the key path") {
  const auto base = golden_base();
  const auto T = GroupInstance::torus(1);
  try {
    make_named_cocycle("anzia", base, T, nlohmann::json::object());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.key_path == "cocycle.tag");
    CHECK(std::string(e.what()).find("anzai") != std::string::npos);
    CHECK(std::string(e.what()).find("trig") != std::string::npos);
  }
  CHECK_THROWS_AS(make_named_cocycle("trig", base, T, nlohmann::json::object()),
                  ConfigError);
}

TEST_CASE("trig evaluation pins simple values") {
  const TrigSum s{{TrigTerm{{1}, 2.0, 0.25}}, 0.5};
  CHECK(eval_trig(s, pt({"0.0"})) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(eval_trig(s, pt({"0.375"})) ==
        doctest::Approx(0.5 + 2.0 * std::cos(2.0 * std::acos(-1.0) * 0.625))
            .epsilon(1e-12));
  // argument reduction happens before the cosine: huge multiples of the
  // frequency cannot shift the value
  const TrigSum h{{TrigTerm{{1000000}, 1.0, 0.0}}, 0.0};
  CHECK(std::abs(eval_trig(h, pt({"0.5"})) - 1.0) <= 1e-12);
}

TEST_CASE("trig evaluation matches the naive oracle along an orbit") {
  const auto base = golden_base();
  const TrigSum s{{TrigTerm{{1}, 0.7, 0.1}, TrigTerm{{3}, 0.2, -0.25}}, 0.05};
  TorusPoint x = pt({"0.2"});
  double worst = 0.0;
  for (int i = 0; i < 2000; ++i) {
    const double lib = eval_trig(s, x);
    const double ref = oracle::eval_trig_naive(s, {x.coords[0].to_double()});
    worst = std::max(worst, std::abs(lib - ref));
    rotate_inplace(base, x, 1);
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("constant cocycle sums exactly") {
  const auto base = golden_base();
  const auto V = GroupInstance::real_vector(1);
  const Cocycle f = make_named_cocycle("constant", base, V, {{"value", 0.5}});
  const auto x = pt({"0.3"});
  CHECK(evaluate_cocycle(f, 0, x)[0] == 0.0);
  CHECK(evaluate_cocycle(f, 10, x)[0] == 5.0);
  CHECK(evaluate_cocycle(f, -10, x)[0] == -5.0);
  CHECK(evaluate_cocycle(f, 100000, x)[0] == 50000.0);
}

TEST_CASE("coboundary products telescope against the transfer oracle") {
  const auto base = golden_base();
  const auto V = GroupInstance::real_vector(2);
  const std::vector<TrigSum> transfer = {sum1(1, 0.8, 0.0), sum1(2, 0.3, 0.1)};
  const Cocycle f(base, V, CoboundaryGen{transfer});
  const auto x = pt({"0.41"});
  for (const std::int64_t n :
       {std::int64_t(1), std::int64_t(17), std::int64_t(1000),
        std::int64_t(1000000), std::int64_t(-9), std::int64_t(-100000)}) {
    const auto got = evaluate_cocycle(f, n, x);
    const TorusPoint y = rotate(base, x, n);
    for (int j = 0; j < 2; ++j) {
      const double ref =
          oracle::eval_trig_naive(transfer[j], {y.coords[0].to_double()}) -
          oracle::eval_trig_naive(transfer[j], {x.coords[0].to_double()});
      CHECK(std::abs(got[j] - ref) <= 1e-9);
    }
  }
}

TEST_CASE("anzai products match the closed form") {
  const auto base = golden_base();
  const auto T = GroupInstance::torus(1);
  const Cocycle f(base, T, AnzaiGen{});
  const auto x = pt({"0.23"});
  for (const std::int64_t n :
       {std::int64_t(1), std::int64_t(2), std::int64_t(999),
        std::int64_t(100000), std::int64_t(-1), std::int64_t(-7),
        std::int64_t(-10000)}) {
    const auto got = evaluate_cocycle(f, n, x);
    const Frac128 ref = oracle::arith_progression_sum(
        x.coords[0], base.alpha()[0], n);
    CHECK(circle_gap(got[0], ref.to_double()) <= 1e-9);
  }
}

TEST_CASE("cocycle identity holds for every generator family") {
  const auto base = golden_base();
  std::vector<Cocycle> fams;
  fams.push_back(make_named_cocycle("constant", base,
                                    GroupInstance::heisenberg_real(),
                                    {{"value", {0.25, -0.5, 0.125}}}));
  fams.emplace_back(base, GroupInstance::real_vector(2),
                    TrigMapGen{{sum1(1, 0.4), sum1(2, 0.9, 0.2)}});
  fams.emplace_back(base, GroupInstance::torus(1),
                    CoboundaryGen{{sum1(1, 0.2)}});
  fams.emplace_back(base, GroupInstance::torus(1), AnzaiGen{});
  fams.emplace_back(base, GroupInstance::heisenberg_real(),
                    HeisenbergLiftGen{sum1(1, 0.1), sum1(1, 0.1, -0.25)});
  {
    std::vector<Cocycle> parts;
    parts.emplace_back(base, GroupInstance::torus(1), AnzaiGen{});
    parts.emplace_back(base, GroupInstance::real_vector(1),
                       CoboundaryGen{{sum1(1, 0.5)}});
    fams.emplace_back(
        base,
        GroupInstance::direct_product(
            {GroupInstance::torus(1), GroupInstance::real_vector(1)}),
        ProductGen{std::move(parts)});
  }
  const auto x = pt({"0.37"});
  for (const auto& f : fams) {
    CAPTURE(f.tag());
    // Both sides of the identity regroup the same ~2000 factors. On the
    // Heisenberg target the homogeneous gauge maps a central reassociation
    // drift d to sqrt(d), so double precision cannot do better than ~1e-7
    // there; abelian targets accumulate linearly and stay below 1e-9.
    const double tol =
        f.target().tag().rfind("heisenberg", 0) == 0 ? 1e-6 : 1e-9;
    for (const auto& [k, l] : std::vector<std::pair<std::int64_t, std::int64_t>>{
             {1, 1}, {5, 3}, {1000, 999}, {-4, 9}, {12, -30}, {-7, -8}}) {
      CHECK(verify_cocycle_identity(f, k, l, x) <= tol);
    }
  }
}

TEST_CASE("negative steps invert the forward product exactly") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::heisenberg_real(),
                  HeisenbergLiftGen{sum1(1, 0.3), sum1(2, 0.4, -0.25)});
  const auto x = pt({"0.61"});
  for (const std::int64_t n : {std::int64_t(1), std::int64_t(37),
                               std::int64_t(5000)}) {
    const auto fwd = evaluate_cocycle(f, n, x);
    const auto bwd = evaluate_cocycle(f, -n, rotate(base, x, n));
    const auto inv = invert(f.target(), fwd);
    CHECK(bwd == inv);
  }
}

TEST_CASE("skew iteration composes the product on the left") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::heisenberg_real(),
                  HeisenbergLiftGen{sum1(1, 0.5), sum1(1, 0.5, -0.25)});
  const auto x = pt({"0.15"});
  GroupElement g(3);
  g << 0.5, -0.25, 1.0;
  const SkewState s{x, g};
  for (const std::int64_t n : {std::int64_t(0), std::int64_t(1),
                               std::int64_t(123), std::int64_t(-55)}) {
    const auto out = skew_iterate(f, s, n);
    CHECK(out.x == rotate(base, x, n));
    const auto expect = compose(f.target(), evaluate_cocycle(f, n, x), g);
    CHECK(group_distance(f.target(), out.g, expect) <= 1e-12);
  }
}

TEST_CASE("walker tracks the direct evaluation in both directions") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::heisenberg_real(),
                  HeisenbergLiftGen{sum1(1, 0.6), sum1(3, 0.2, -0.25)});
  const auto x = pt({"0.48"});
  for (const int dir : {+1, -1}) {
    CocycleWalker w(f, x, dir);
    CHECK(w.n() == 0);
    CHECK(group_distance(f.target(), w.value(), identity(f.target())) == 0.0);
    std::int64_t checked = 0;
    // hop across block boundaries (block size 4096)
    for (const std::int64_t stop :
         {std::int64_t(1), std::int64_t(4095), std::int64_t(4096),
          std::int64_t(4097), std::int64_t(10000)}) {
      w.advance(stop - checked);
      checked = stop;
      CHECK(w.n() == dir * stop);
      CHECK(w.point() == rotate(base, x, dir * stop));
      const auto direct = evaluate_cocycle(f, dir * stop, x);
      // The walker groups the same 10^4 factors differently than the direct
      // sweep. Reassociation moves the central coordinate by up to about
      // n * ulp ~ 1e-12, and the homogeneous gauge turns a central gap d
      // into sqrt(d), so 1e-6 is the honest double-precision bound here.
      CHECK(group_distance(f.target(), w.value(), direct) <= 1e-6);
    }
  }
}

TEST_CASE("step budget raises with progress attached") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::real_vector(1),
                  TrigMapGen{{sum1(1, 1.0)}});
  const auto x = pt({"0.5"});
  CHECK_NOTHROW(evaluate_cocycle(f, 1000, x, 1000));
  try {
    evaluate_cocycle(f, 100000, x, 999);
    FAIL("expected BudgetError");
  } catch (const BudgetError& e) {
    CHECK(e.steps_done > 0);
    CHECK(e.steps_done <= 999);
    CHECK(e.partial_result.size() == 1);
  }
}

TEST_CASE("heisenberg lift defaults to the cos/sin pair") {
  const auto base = golden_base();
  const auto H = GroupInstance::heisenberg_real();
  const Cocycle f =
      make_named_cocycle("heisenberg-lift", base, H, nlohmann::json());
  const auto g = evaluate_generator(f, pt({"0.0"}));
  CHECK(g[0] == doctest::Approx(1.0).epsilon(1e-12));  // cos(0)
  CHECK(std::abs(g[1]) <= 1e-12);                      // sin(0)
  CHECK(g[2] == 0.0);
}

TEST_CASE("generator variants validate their target groups") {
  const auto base = golden_base();
  CHECK_THROWS_AS(Cocycle(base, GroupInstance::integer_lattice(1),
                          TrigMapGen{{sum1(1, 1.0)}}),
                  Error);
  CHECK_THROWS_AS(Cocycle(base, GroupInstance::torus(2), AnzaiGen{}), Error);
  CHECK_THROWS_AS(Cocycle(base, GroupInstance::torus(1),
                          HeisenbergLiftGen{sum1(1, 1.0), sum1(1, 1.0)}),
                  Error);
  // frequency vector length must match the base dimension
  CHECK_THROWS_AS(Cocycle(base, GroupInstance::real_vector(1),
                          TrigMapGen{{TrigSum{{TrigTerm{{1, 2}, 1.0, 0.0}}, 0.0}}}),
                  DimensionError);
}

TEST_CASE("product factors must line up with the target factors") {
  const auto base = golden_base();
  const auto P = GroupInstance::direct_product(
      {GroupInstance::torus(1), GroupInstance::real_vector(1)});
  const nlohmann::json good = {
      {"factors",
       {{{"tag", "anzai"}},
        {{"tag", "constant"}, {"params", {{"value", 0.5}}}}}}};
  CHECK_NOTHROW(make_named_cocycle("product", base, P, good));
  const nlohmann::json short_list = {
      {"factors", {{{"tag", "anzai"}}}}};
  CHECK_THROWS_AS(make_named_cocycle("product", base, P, short_list),
                  ConfigError);
  CHECK_THROWS_AS(
      make_named_cocycle("product", base, GroupInstance::torus(1), good),
      ConfigError);
}

TEST_CASE("coboundary transfer shifts are exact") {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::real_vector(1),
                  CoboundaryGen{{sum1(3, 1.0)}});
  REQUIRE(f.transfer_shifts().size() == 1);
  REQUIRE(f.transfer_shifts()[0].size() == 1);
  CHECK(f.transfer_shifts()[0][0].raw() ==
        Frac128::named("golden").times(3).raw());
}

}  // TEST_SUITE
