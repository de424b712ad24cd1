#include <doctest.h>

#include <algorithm>

#include "skewlab/error.hpp"
#include "skewlab/rotation.hpp"

using skewlab::AlphaTag;
using skewlab::Frac128;
using skewlab::RotationSystem;
using skewlab::TorusPoint;

namespace {

RotationSystem golden_base() {
  return RotationSystem({Frac128::named("golden")}, AlphaTag::Golden);
}

RotationSystem two_dim_base() {
  return RotationSystem({Frac128::named("golden"), Frac128::named("sqrt2m1")},
                        AlphaTag::Quadratic);
}

}  // namespace

TEST_SUITE("rotation") {

TEST_CASE("construction rejects visibly dyadic vectors") {
  CHECK_THROWS_AS(RotationSystem({Frac128::from_double(0.5)}), skewlab::Error);
  CHECK_THROWS_AS(RotationSystem({Frac128()}), skewlab::Error);
  CHECK_THROWS_AS(RotationSystem({}), skewlab::Error);
  CHECK_NOTHROW(RotationSystem({Frac128::from_ratio(1, 3)}));
}

TEST_CASE("rotation is an exact group action") {
  const auto base = two_dim_base();
  const TorusPoint x{{Frac128::from_decimal("0.3"), Frac128::from_decimal("0.7")}};
  const TorusPoint y = rotate(base, rotate(base, x, 12345), -12345);
  CHECK(y == x);
  CHECK(rotate(base, rotate(base, x, 100), 23) == rotate(base, x, 123));

  TorusPoint z = x;
  for (int i = 0; i < 50; ++i) rotate_inplace(base, z, 1);
  CHECK(z == rotate(base, x, 50));
}

TEST_CASE("rotate refuses out-of-range step counts") {
  const auto base = golden_base();
  const TorusPoint x{{Frac128()}};
  CHECK_NOTHROW(rotate(base, x, skewlab::kMaxIterate));
  CHECK_THROWS_AS(rotate(base, x, skewlab::kMaxIterate + 1), skewlab::Error);
  CHECK_THROWS_AS(rotate(base, x, -skewlab::kMaxIterate - 1), skewlab::Error);
}

TEST_CASE("base distance is the max coordinate circle distance") {
  const auto base = two_dim_base();
  const TorusPoint x{{Frac128::from_decimal("0.1"), Frac128::from_decimal("0.5")}};
  const TorusPoint y{{Frac128::from_decimal("0.9"), Frac128::from_decimal("0.5")}};
  CHECK(base_distance(base, x, y) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(base_distance(base, x, x) == 0.0);
  CHECK(base_distance_raw(base, x, y) ==
        Frac128::from_decimal("0.2").dist_raw());
}

TEST_CASE("check_point flags dimension mismatches") {
  const auto base = two_dim_base();
  CHECK_THROWS_AS(check_point(base, TorusPoint{{Frac128()}}),
                  skewlab::DimensionError);
  CHECK_NOTHROW(check_point(base, TorusPoint{{Frac128(), Frac128()}}));
}

TEST_CASE("golden continued fraction is all ones with Fibonacci q") {
  const auto cf = continued_fraction(Frac128::named("golden"), 20);
  REQUIRE(cf.entries.size() == 20);
  std::int64_t f1 = 0, f2 = 1;
  for (const auto& e : cf.entries) {
    CHECK(e.a == 1);
    const std::int64_t q = f1 + f2;
    CHECK(e.q == q);
    f1 = f2;
    f2 = q;
  }
}

TEST_CASE("sqrt2m1 continued fraction is all twos with Pell q") {
  const auto cf = continued_fraction(Frac128::named("sqrt2m1"), 15);
  REQUIRE(cf.entries.size() == 15);
  std::int64_t p1 = 0, p2 = 1;
  for (const auto& e : cf.entries) {
    CHECK(e.a == 2);
    const std::int64_t q = 2 * p2 + p1;
    CHECK(e.q == q);
    p1 = p2;
    p2 = q;
  }
}

TEST_CASE("continued fraction of a short rational truncates") {
  const auto cf = continued_fraction(Frac128::from_ratio(3, 7), 30);
  CHECK(cf.truncated);
  REQUIRE(cf.entries.size() >= 2);
  CHECK(cf.entries[0].a == 2);  // 7/3 = 2 + 1/3
  CHECK(cf.entries[1].a == 3);
}

TEST_CASE("ladder search reproduces the brute force scan") {
  for (const double eps : {0.1, 0.05, 0.01}) {
    const auto base = golden_base();
    const auto fast = best_return_times(base, eps, 20'000);
    const auto slow = brute_force_return_times(base, eps, 20'000);
    CHECK_FALSE(fast.truncated);
    CHECK(fast.times == slow.times);
  }
}

TEST_CASE("ladder search matches brute force on two frequencies") {
  const auto base = two_dim_base();
  const auto fast = best_return_times(base, 0.05, 20'000);
  const auto slow = brute_force_return_times(base, 0.05, 20'000);
  CHECK(fast.times == slow.times);
  CHECK_FALSE(slow.times.empty());
}

TEST_CASE("tighter eps gives a nested subset") {
  const auto base = golden_base();
  const auto wide = best_return_times(base, 0.05, 100'000);
  const auto tight = best_return_times(base, 0.01, 100'000);
  CHECK_FALSE(tight.times.empty());
  CHECK(tight.times.size() < wide.times.size());
  CHECK(std::includes(wide.times.begin(), wide.times.end(),
                      tight.times.begin(), tight.times.end()));
  CHECK(std::is_sorted(wide.times.begin(), wide.times.end()));
  CHECK(std::adjacent_find(wide.times.begin(), wide.times.end()) ==
        wide.times.end());
}

TEST_CASE("return times really return") {
  const auto base = two_dim_base();
  const auto hits = best_return_times(base, 0.02, 1'000'000);
  REQUIRE_FALSE(hits.times.empty());
  const skewlab::uint128 cut = skewlab::eps_to_raw(0.02);
  for (const std::int64_t n : hits.times) {
    skewlab::uint128 worst = 0;
    for (const auto& a : base.alpha()) {
      const auto d = a.times(n).dist_raw();
      if (d > worst) worst = d;
    }
    CHECK(worst < cut);
  }
}

TEST_CASE("count cap sets the truncation flag") {
  const auto base = golden_base();
  const auto full = best_return_times(base, 0.1, 100'000);
  REQUIRE(full.times.size() > 5);
  const auto capped = best_return_times(base, 0.1, 100'000, 5);
  CHECK(capped.truncated);
  CHECK(capped.times.size() == 5);
  CHECK(std::includes(full.times.begin(), full.times.end(),
                      capped.times.begin(), capped.times.end()));
}

TEST_CASE("brute force refuses huge ranges") {
  const auto base = golden_base();
  CHECK_THROWS_AS(brute_force_return_times(base, 0.1, 100'000'000),
                  skewlab::BudgetError);
}

TEST_CASE("alpha tags round trip") {
  for (const auto t : {AlphaTag::Golden, AlphaTag::Quadratic,
                       AlphaTag::LiouvilleLike, AlphaTag::Custom}) {
    CHECK(skewlab::alpha_tag_from_string(skewlab::to_string(t)) == t);
  }
}

}  // TEST_SUITE
