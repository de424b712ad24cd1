// Acceptance suite: twelve end-to-end criteria, one PASS/FAIL line each.
// Usage: acceptance <scenarios-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "skewlab/analyzer.hpp"
#include "skewlab/error.hpp"
#include "skewlab/estimate.hpp"
#include "skewlab/scenario.hpp"

using namespace skewlab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("%s %2d. %s (%s)\n", pass ? "PASS" : "FAIL", idx, name,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

RotationSystem golden_base() {
  return RotationSystem({Frac128::named("golden")}, AlphaTag::Golden);
}

TorusPoint rand_point(std::mt19937_64& eng) {
  return TorusPoint{{Frac128::from_double(uniform01(eng))}};
}

double dyadic25(std::mt19937_64& eng, int max_m) {
  const std::int64_t m =
      static_cast<std::int64_t>(eng() % (2 * max_m + 1u)) - max_m;
  return static_cast<double>(m) * 0x1.0p-25;
}

TrigSum rand_sum(std::mt19937_64& eng, double amp_lo, double amp_hi,
                 int max_freq) {
  TrigTerm t;
  t.freq = {static_cast<std::int64_t>(eng() % max_freq) + 1};
  t.amp = amp_lo + uniform01(eng) * (amp_hi - amp_lo);
  t.phase = uniform01(eng);
  return TrigSum{{t}, 0.0};
}

// The six generator families, freshly seeded. The Heisenberg entries use
// tiny coordinates: the homogeneous gauge turns an absolute error d in the
// central coordinate into a distance of order sqrt(d), so identity checks
// at 1e-8 need central magnitudes that keep every rounding near 1e-17.
// Dyadic constants make the nonabelian constant family exact outright.
std::vector<Cocycle> make_families(std::mt19937_64& eng) {
  const auto base = golden_base();
  std::vector<Cocycle> fams;
  {
    GroupElement v(3);
    v << dyadic25(eng, 32), dyadic25(eng, 32), dyadic25(eng, 32);
    fams.emplace_back(base, GroupInstance::heisenberg_real(),
                      ConstantGen{std::move(v)});
  }
  fams.emplace_back(base, GroupInstance::real_vector(2),
                    TrigMapGen{{rand_sum(eng, 0.2, 1.0, 3),
                                rand_sum(eng, 0.2, 1.0, 3)}});
  fams.emplace_back(base, GroupInstance::torus(1),
                    CoboundaryGen{{rand_sum(eng, 0.05, 0.15, 2)}});
  fams.emplace_back(base, GroupInstance::torus(1), AnzaiGen{});
  fams.emplace_back(base, GroupInstance::heisenberg_real(),
                    HeisenbergLiftGen{rand_sum(eng, 1e-6, 8e-6, 2),
                                      rand_sum(eng, 1e-6, 8e-6, 2)});
  {
    std::vector<Cocycle> parts;
    parts.emplace_back(base, GroupInstance::torus(1), AnzaiGen{});
    parts.emplace_back(base, GroupInstance::real_vector(1),
                       CoboundaryGen{{rand_sum(eng, 0.2, 0.8, 2)}});
    fams.emplace_back(
        base,
        GroupInstance::direct_product(
            {GroupInstance::torus(1), GroupInstance::real_vector(1)}),
        ProductGen{std::move(parts)});
  }
  return fams;
}

void crit1_identity() {
  std::mt19937_64 eng(11);
  double worst = 0.0;
  std::string at;
  const auto fams = make_families(eng);
  for (const auto& f : fams) {
    for (int i = 0; i < 500; ++i) {
      const std::int64_t k =
          static_cast<std::int64_t>(eng() % 20001u) - 10000;
      const std::int64_t l =
          static_cast<std::int64_t>(eng() % 20001u) - 10000;
      const double d = verify_cocycle_identity(f, k, l, rand_point(eng));
      if (d > worst) {
        worst = d;
        at = f.tag();
      }
    }
  }
  report(1, "cocycle identity, 6 families x 500 samples, |k|,|l| <= 1e4",
         worst <= 1e-8, "worst " + fmt(worst) + " at " + at + ", tol 1e-8");
}

void crit2_inversion() {
  std::mt19937_64 eng(13);
  double worst = 0.0;
  const auto fams = make_families(eng);
  for (const auto& f : fams) {
    for (int i = 0; i < 500; ++i) {
      const std::int64_t n = static_cast<std::int64_t>(eng() % 10000u) + 1;
      const TorusPoint x = rand_point(eng);
      const auto fwd = evaluate_cocycle(f, n, x);
      const auto bwd = evaluate_cocycle(f, -n, rotate(f.base(), x, n));
      worst = std::max(
          worst, group_distance(f.target(), bwd, invert(f.target(), fwd)));
    }
  }
  report(2, "inversion branch, 500 samples per family", worst <= 1e-10,
         "worst " + fmt(worst) + ", tol 1e-10");
}

void crit3_matrix_oracle() {
  std::mt19937_64 eng(17);
  const auto H = GroupInstance::heisenberg_real();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto g = oracle::dyadic_element(H, eng);
    const auto h = oracle::dyadic_element(H, eng);
    worst = std::max(worst, group_distance(H, compose(H, g, h),
                                           oracle::heis_compose_matrix(g, h)));
    worst = std::max(worst, group_distance(H, invert(H, g),
                                           oracle::heis_invert_matrix(g)));
    worst = std::max(worst, group_distance(H, conjugate(H, g, h),
                                           oracle::heis_conjugate_matrix(g, h)));
  }
  report(3, "heisenberg ops vs 3x3 matrix arithmetic, 1000 elements",
         worst <= 1e-12, "worst " + fmt(worst) + ", tol 1e-12");
}

void crit4_return_times() {
  std::mt19937_64 eng(19);
  std::vector<RotationSystem> bases;
  bases.push_back(golden_base());
  bases.emplace_back(std::vector<Frac128>{Frac128::named("sqrt2m1")},
                     AlphaTag::Quadratic);
  while (bases.size() < 5) {
    const uint128 q = (uint128(eng()) << 16) | 1u;  // odd, ~2^80
    const uint128 p = ((uint128(eng()) << 16) | (eng() & 0xffffu)) % q;
    if (p == 0) continue;
    try {
      bases.emplace_back(std::vector<Frac128>{Frac128::from_ratio(p, q)},
                         AlphaTag::Custom);
    } catch (const Error&) {
    }
  }
  bool ok = true;
  std::string detail = "5 alphas x eps {0.1, 0.01, 0.001}, n <= 1e5";
  for (const auto& b : bases) {
    for (const double eps : {0.1, 0.01, 0.001}) {
      const auto fast = best_return_times(b, eps, 100'000);
      const auto slow = brute_force_return_times(b, eps, 100'000);
      if (fast.times != slow.times || fast.truncated != slow.truncated) {
        ok = false;
        detail = "mismatch at eps " + fmt(eps) + " (" +
                 std::to_string(fast.times.size()) + " vs " +
                 std::to_string(slow.times.size()) + " times)";
      }
    }
  }
  report(4, "return-time ladder matches the linear scan", ok, detail);
}

void crit5_coboundary_trivial() {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::real_vector(1),
                  CoboundaryGen{{TrigSum{{TrigTerm{{1}, 1.0, 0.0}}, 0.0}}});
  const TorusPoint x{{Frac128::from_decimal("0.2")}};
  const auto E = estimate_E(f, x, 0.005, 0.02, 4, 1'000'000, 0.02, 8.0, 2);
  double radius = 0.0;
  for (const auto& p : E.points)
    radius = std::max(radius, group_norm(E.group, p));
  const bool e_ok = !E.points.empty() && radius <= 0.05;

  const auto sample =
      sample_orbit_closure(f, SkewState{x, identity(f.target())}, 1'000'000);
  const auto prof = compactness_profile(sample, SubgroupSpec::trivial(),
                                        {1000, 10'000, 100'000, 1'000'000});
  double prof_max = 0.0;
  for (const auto& p : prof) prof_max = std::max(prof_max, p.radius);
  const bool prof_ok =
      prof_max <= 2.1 && classify_profile(prof) == GrowthVerdict::Bounded;

  const auto sec = vertical_section(sample, x, 0.002, 0.02, 8.0);
  const bool sec_ok = !sec.points.empty() &&
                      section_coset_defect(sec, SubgroupSpec::trivial()) <=
                          2 * 0.02;
  report(5, "coboundary: E-cluster <= 0.05, profile <= 2max|b|+0.1, section",
         e_ok && prof_ok && sec_ok,
         "E radius " + fmt(radius) + ", profile max " + fmt(prof_max) +
             ", section defect " +
             fmt(sec.points.empty()
                     ? -1.0
                     : section_coset_defect(sec, SubgroupSpec::trivial())));
}

void crit6_anzai_full() {
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::torus(1), AnzaiGen{});
  const TorusPoint x{{Frac128::from_decimal("0.3")}};
  const auto E = estimate_E(f, x, 0.01, 0.05, 4, 1'000'000, 0.02, 4.0, 3);
  std::vector<std::vector<double>> pts;
  for (const auto& p : E.points) pts.push_back({p[0]});
  const bool dense = oracle::grid_covered(pts, 1, 0.05);

  const auto sample =
      sample_orbit_closure(f, SkewState{x, identity(f.target())}, 10'000);
  const double sdef = surjectivity_defect(sample, 0.01);

  const auto split = connected_components(E, 3 * 0.02);
  report(6, "anzai: E 0.05-dense, surjectivity <= 0.01, one component",
         dense && sdef <= 0.01 && split.components.size() == 1,
         std::string(dense ? "dense" : "NOT dense") + ", defect " + fmt(sdef) +
             ", components " + std::to_string(split.components.size()));
}

struct ConjCase {
  Cocycle f;
  double r, W, eps, eta;
  std::int64_t N;
  int n_range;
};

double conj_worst(const ConjCase& c, std::mt19937_64& eng, int trials,
                  std::string& detail) {
  const TorusPoint x{{Frac128::from_decimal("0.3")}};
  const auto Ex = estimate_E(c.f, x, c.eps, c.eta, 3, c.N, c.r, c.W, 7);
  if (Ex.points.empty()) {
    detail = "empty base estimate";
    return 1e9;
  }
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const std::int64_t n =
        static_cast<std::int64_t>(eng() % static_cast<unsigned>(c.n_range)) + 1;
    const TorusPoint y = rotate(c.f.base(), x, n);
    const auto En =
        estimate_E(c.f, y, c.eps, c.eta, 3, c.N, c.r, c.W, 7 + i);
    const auto g = evaluate_cocycle(c.f, n, x);
    const auto C = clip_to_window(conjugate_set(Ex, g), c.W);
    worst = std::max(worst, hausdorff_distance(En, C));
  }
  return worst;
}

void crit7_conjugation() {
  std::mt19937_64 eng(23);
  const auto base = golden_base();
  std::string d1, d2;
  const ConjCase anzai{Cocycle(base, GroupInstance::torus(1), AnzaiGen{}),
                       0.05, 2.0, 0.01, 0.03, 200'000, 500};
  const double w1 = conj_worst(anzai, eng, 10, d1);
  const ConjCase lift{
      Cocycle(base, GroupInstance::heisenberg_real(),
              HeisenbergLiftGen{TrigSum{{TrigTerm{{2}, 0.05, 0.0}}, 0.0},
                                TrigSum{{TrigTerm{{1}, 0.05, -0.25}}, 0.0}}),
      0.1, 2.0, 0.005, 0.02, 500'000, 300};
  const double w2 = conj_worst(lift, eng, 10, d2);
  const bool ok1 = w1 <= 3 * anzai.r + 0.05;
  const bool ok2 = w2 <= 3 * lift.r + 0.05;
  report(7, "conjugation identity for E under 20 seeded translates",
         ok1 && ok2,
         "anzai " + fmt(w1) + " tol " + fmt(3 * anzai.r + 0.05) +
             ", heisenberg " + fmt(w2) + " tol " + fmt(3 * lift.r + 0.05));
}

void crit8_abelian_constancy() {
  std::mt19937_64 eng(29);
  const auto base = golden_base();
  const Cocycle f(base, GroupInstance::real_vector(1),
                  CoboundaryGen{{TrigSum{{TrigTerm{{1}, 0.8, 0.0}}, 0.0}}});
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    const auto Ex = estimate_E(f, rand_point(eng), 0.005, 0.02, 3, 200'000,
                               0.02, 8.0, 31 + i);
    const auto Ey = estimate_E(f, rand_point(eng), 0.005, 0.02, 3, 200'000,
                               0.02, 8.0, 131 + i);
    if (Ex.points.empty() || Ey.points.empty()) {
      worst = 1e9;
      break;
    }
    worst = std::max(worst, hausdorff_distance(Ex, Ey));
  }
  report(8, "abelian coboundary: essential range independent of the point",
         worst <= 3 * 0.02, "worst pair distance " + fmt(worst) + ", tol 0.06");
}

void crit9_double_coset() {
  std::mt19937_64 eng(37);
  const auto H = GroupInstance::heisenberg_real();
  const auto C = SubgroupSpec::center_of_heisenberg();
  double min_inf = 1e9, max_shift = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double rho = 0.7 + 1.1 * uniform01(eng);
    const double theta = 2.0 * std::acos(-1.0) * uniform01(eng);
    GroupElement g(3);
    g << rho * std::cos(theta), rho * std::sin(theta),
        -1.5 + 3.0 * uniform01(eng);
    const double coarse = double_coset_infimum(H, C, g, {2.0, 0.01, 400'000});
    const double fine = double_coset_infimum(H, C, g, {2.0, 0.005, 800'000});
    min_inf = std::min(min_inf, coarse);
    max_shift = std::max(max_shift, std::abs(coarse - fine));
  }
  report(9, "double-coset infima off the center stay separated and stable",
         min_inf >= 0.5 && max_shift <= 0.05,
         "min infimum " + fmt(min_inf) + ", max halving shift " +
             fmt(max_shift));
}

void crit10_transience() {
  const auto base = golden_base();
  GroupElement one(1);
  one << 1.0;
  const Cocycle f(base, GroupInstance::real_vector(1), ConstantGen{one});
  const TorusPoint x{{Frac128::from_decimal("0.3")}};
  const auto P = estimate_P(f, x, {0.05, 0.02, 0.01}, 1'000'000, 0.05, 8.0);
  const bool empty_flagged = P.points.empty() && P.flags.window_escape;
  const auto sample =
      sample_orbit_closure(f, SkewState{x, identity(f.target())}, 1'000'000);
  const auto prof = compactness_profile(sample, SubgroupSpec::trivial(),
                                        {1000, 10'000, 100'000, 1'000'000});
  const bool growing = classify_profile(prof) == GrowthVerdict::Growing;
  report(10, "transient drift: empty flagged P-estimate, growing profile",
         empty_flagged && growing,
         std::string(empty_flagged ? "empty+flag" : "BAD P-estimate") +
             ", verdict " + to_string(classify_profile(prof)));
}

std::vector<fs::path> scenario_files(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool dirs_byte_identical(const fs::path& a, const fs::path& b,
                         std::string& why) {
  std::vector<fs::path> names;
  for (const auto& e : fs::directory_iterator(a))
    if (e.path().filename() != "report.txt")  // wall time lives there
      names.push_back(e.path().filename());
  std::sort(names.begin(), names.end());
  for (const auto& n : names) {
    if (!fs::exists(b / n)) {
      why = "missing " + n.string();
      return false;
    }
    if (slurp(a / n) != slurp(b / n)) {
      why = "differs: " + n.string();
      return false;
    }
  }
  return true;
}

void crit11_determinism(const fs::path& scenarios, const fs::path& tmp,
                        std::vector<RunReport>& first_pass) {
  bool ok = true;
  std::string detail = "byte-identical artifacts, reseeded estimates <= 2r";
  const auto files = scenario_files(scenarios);
  if (files.empty()) {
    report(11, "determinism across reruns and seeds", false,
           "no scenario files found");
    return;
  }
  for (const auto& file : files) {
    const auto cfg = parse_config(file.string());
    RunOptions oa;
    oa.out_base = (tmp / "a").string();
    oa.quiet = true;
    RunOptions ob = oa;
    ob.out_base = (tmp / "b").string();
    const auto ra = run_scenario(cfg, oa);
    const auto rb = run_scenario(cfg, ob);
    first_pass.push_back(ra);
    std::string why;
    if (!dirs_byte_identical(ra.outdir, rb.outdir, why)) {
      ok = false;
      detail = file.filename().string() + ": " + why;
      break;
    }
    // the seed moves the essential-range sampling by at most the cloud
    // resolution
    const Cocycle f =
        make_named_cocycle(cfg.cocycle_tag, cfg.base, cfg.group,
                           cfg.cocycle_params);
    const auto e1 = estimate_E(f, cfg.x0, cfg.eps.back(), cfg.eta,
                               cfg.samples, cfg.N, cfg.r, cfg.W, cfg.seed);
    const auto e2 = estimate_E(f, cfg.x0, cfg.eps.back(), cfg.eta,
                               cfg.samples, cfg.N, cfg.r, cfg.W, cfg.seed + 1);
    if (e1.points.empty() != e2.points.empty()) {
      ok = false;
      detail = file.filename().string() + ": reseeding changed emptiness";
      break;
    }
    if (!e1.points.empty()) {
      const double h = hausdorff_distance(e1, e2);
      if (h > 2 * cfg.r) {
        ok = false;
        detail = file.filename().string() + ": reseeded shift " + fmt(h) +
                 " > " + fmt(2 * cfg.r);
        break;
      }
    }
  }
  report(11, "determinism across reruns and seeds", ok, detail);
}

void crit12_inclusion(const std::vector<RunReport>& runs) {
  bool ok = !runs.empty();
  std::string detail = "P within section quotients within E on every scenario";
  double worst = 0.0;
  for (const auto& rep : runs) {
    bool saw_p = false, saw_e = false;
    for (const auto& d : rep.diagnostics.entries) {
      if (d.name == "inclusion_p" || d.name == "inclusion_e") {
        (d.name == "inclusion_p" ? saw_p : saw_e) = true;
        worst = std::max(worst, d.value);
        if (!d.pass) {
          ok = false;
          detail = d.name + " = " + fmt(d.value) + " > " + fmt(d.tolerance);
        }
      }
    }
    if (!saw_p || !saw_e) {
      ok = false;
      detail = "scenario missing inclusion diagnostics";
    }
  }
  if (ok) detail += ", worst defect " + fmt(worst);
  report(12, "inclusion chain on the scenario suite", ok, detail);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <scenarios-dir>\n", argv[0]);
    return 2;
  }
  const fs::path scenarios(argv[1]);
  const fs::path tmp =
      fs::temp_directory_path() /
      ("skewlab-acceptance-" + std::to_string(::getpid()));
  fs::create_directories(tmp);

  const auto t0 = std::chrono::steady_clock::now();
  try {
    crit1_identity();
    crit2_inversion();
    crit3_matrix_oracle();
    crit4_return_times();
    crit5_coboundary_trivial();
    crit6_anzai_full();
    crit7_conjugation();
    crit8_abelian_constancy();
    crit9_double_coset();
    crit10_transience();
    std::vector<RunReport> runs;
    crit11_determinism(scenarios, tmp, runs);
    crit12_inclusion(runs);
  } catch (const std::exception& e) {
    std::printf("FAIL  suite aborted: %s\n", e.what());
    ++g_failures;
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  std::printf("%d/12 criteria passed in %.1f s\n", 12 - g_failures, secs);

  std::error_code ec;
  fs::remove_all(tmp, ec);
  return g_failures == 0 ? 0 : 1;
}
