#include "skewlab/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <utility>

#include "skewlab/error.hpp"

namespace fs = std::filesystem;

namespace skewlab {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::string> kAllDiagnostics = {
    "surjectivity", "profile",   "section",  "gamma",    "stabilizer",
    "components",   "selection", "semigroup", "inclusion"};

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  if (!j.is_object())
    throw ConfigError(path.empty() ? "config" : path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) {
        ok = true;
        break;
      }
    if (!ok)
      throw ConfigError(path.empty() ? it.key() : path + "." + it.key(),
                        "unknown key");
  }
}

double need_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

std::string fmt_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Frac128 parse_alpha_coord(const json& v, const std::string& path,
                          AlphaTag* tag) {
  try {
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "golden") {
        *tag = AlphaTag::Golden;
        return Frac128::named(s);
      }
      if (s == "sqrt2m1") {
        *tag = AlphaTag::Quadratic;
        return Frac128::named(s);
      }
      if (s.rfind("0x", 0) == 0) {
        *tag = AlphaTag::Custom;
        return Frac128::from_hex(s);
      }
      if (!s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) ||
                         s[0] == '.')) {
        *tag = AlphaTag::Custom;
        return Frac128::from_decimal(s);
      }
      throw ConfigError(path, "unknown alpha name '" + s +
                                  "' (use golden, sqrt2m1, a decimal or 0x hex "
                                  "string, or {\"hex\": ...})");
    }
    if (v.is_object()) {
      check_keys(v, path, {"hex"});
      if (!v.contains("hex") || !v["hex"].is_string())
        throw ConfigError(path + ".hex", "expected a hex string");
      *tag = AlphaTag::Custom;
      return Frac128::from_hex(v["hex"].get<std::string>());
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path,
                    "alpha coordinates are named constants, decimal strings, "
                    "or {\"hex\": ...} (binary floats are dyadic)");
}

Frac128 parse_point_coord(const json& v, const std::string& path) {
  try {
    if (v.is_number()) {
      double d = v.get<double>();
      d -= std::floor(d);
      if (d >= 1.0) d = 0.0;
      return Frac128::from_double(d);
    }
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      return s.rfind("0x", 0) == 0 ? Frac128::from_hex(s)
                                   : Frac128::from_decimal(s);
    }
    if (v.is_object()) {
      check_keys(v, path, {"hex"});
      return Frac128::from_hex(v["hex"].get<std::string>());
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path, "expected a number, decimal string, or hex object");
}

SubgroupSpec parse_subgroup(const json& v, const std::string& path) {
  try {
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "trivial") return SubgroupSpec::trivial();
      if (s == "full") return SubgroupSpec::full();
      if (s == "center") return SubgroupSpec::center_of_heisenberg();
      if (s.rfind("lattice:", 0) == 0)
        return SubgroupSpec::lattice_zd(std::stoi(s.substr(8)));
      throw ConfigError(path, "unknown subgroup tag '" + s + "'");
    }
    if (v.is_object()) {
      if (!v.contains("tag") || !v["tag"].is_string())
        throw ConfigError(path + ".tag", "expected a string tag");
      const std::string tag = v["tag"].get<std::string>();
      if (tag == "cyclic") {
        check_keys(v, path, {"tag", "num", "den"});
        std::vector<std::int64_t> num = v.at("num").get<std::vector<std::int64_t>>();
        std::vector<std::int64_t> den = v.at("den").get<std::vector<std::int64_t>>();
        return SubgroupSpec::torus_cyclic(std::move(num), std::move(den));
      }
      if (tag == "subspace") {
        check_keys(v, path, {"tag", "basis"});
        const auto& rows = v.at("basis");
        if (!rows.is_array() || rows.empty())
          throw ConfigError(path + ".basis", "expected an array of vectors");
        const auto dim = rows[0].size();
        Eigen::MatrixXd basis(dim, rows.size());
        for (std::size_t c = 0; c < rows.size(); ++c) {
          if (rows[c].size() != dim)
            throw ConfigError(path + ".basis", "ragged basis vectors");
          for (std::size_t rr = 0; rr < dim; ++rr)
            basis(static_cast<Eigen::Index>(rr),
                  static_cast<Eigen::Index>(c)) = rows[c][rr].get<double>();
        }
        return SubgroupSpec::vector_subspace(std::move(basis));
      }
      if (tag == "product") {
        check_keys(v, path, {"tag", "parts"});
        std::vector<SubgroupSpec> parts;
        int i = 0;
        for (const auto& p : v.at("parts"))
          parts.push_back(
              parse_subgroup(p, path + ".parts[" + std::to_string(i++) + "]"));
        return SubgroupSpec::product(std::move(parts));
      }
      throw ConfigError(path + ".tag", "unknown subgroup tag '" + tag + "'");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
  throw ConfigError(path, "expected a subgroup tag or object");
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

ScenarioConfig parse_config_json(const json& raw) {
  check_keys(raw, "",
             {"base", "group", "cocycle", "start", "budgets", "tolerances",
              "seed", "samples", "diagnostics", "subgroup", "selection",
              "expect", "N"});

  // base
  if (!raw.contains("base")) throw ConfigError("base", "missing");
  std::vector<Frac128> alphas;
  AlphaTag tag = AlphaTag::Custom;
  std::vector<AlphaTag> tags;
  {
    json spec = raw["base"];
    std::optional<AlphaTag> declared;
    if (spec.is_object()) {
      check_keys(spec, "base", {"alpha", "tag"});
      if (spec.contains("tag")) {
        if (!spec["tag"].is_string())
          throw ConfigError("base.tag", "expected a string");
        try {
          declared = alpha_tag_from_string(spec["tag"].get<std::string>());
        } catch (const Error& e) {
          throw ConfigError("base.tag", e.what());
        }
      }
      if (!spec.contains("alpha")) throw ConfigError("base.alpha", "missing");
      spec = spec["alpha"];
    }
    json arr = spec.is_array() ? spec : json::array({spec});
    if (arr.empty()) throw ConfigError("base.alpha", "empty");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      AlphaTag t = AlphaTag::Custom;
      alphas.push_back(parse_alpha_coord(
          arr[i], "base.alpha[" + std::to_string(i) + "]", &t));
      tags.push_back(t);
    }
    tag = tags[0];
    for (AlphaTag t : tags)
      if (t != tag) tag = AlphaTag::Custom;
    if (declared) tag = *declared;
  }
  RotationSystem base = [&] {
    try {
      return RotationSystem(alphas, tag);
    } catch (const Error& e) {
      throw ConfigError("base.alpha", e.what());
    }
  }();

  // group
  if (!raw.contains("group") || !raw["group"].is_string())
    throw ConfigError("group", "expected a group tag string");
  GroupInstance group = [&] {
    try {
      return GroupInstance::from_tag(raw["group"].get<std::string>());
    } catch (const Error& e) {
      throw ConfigError("group", e.what());
    }
  }();

  ScenarioConfig cfg(std::move(base), std::move(group));

  // cocycle
  if (!raw.contains("cocycle")) throw ConfigError("cocycle", "missing");
  if (raw["cocycle"].is_string()) {
    cfg.cocycle_tag = raw["cocycle"].get<std::string>();
    cfg.cocycle_params = json::object();
  } else {
    check_keys(raw["cocycle"], "cocycle", {"tag", "params"});
    if (!raw["cocycle"].contains("tag") || !raw["cocycle"]["tag"].is_string())
      throw ConfigError("cocycle.tag", "expected a string tag");
    cfg.cocycle_tag = raw["cocycle"]["tag"].get<std::string>();
    cfg.cocycle_params = raw["cocycle"].value("params", json::object());
  }

  // reject unknown cocycle tags and malformed params now, not at run time
  make_named_cocycle(cfg.cocycle_tag, cfg.base, cfg.group, cfg.cocycle_params);

  // start
  cfg.x0.coords.assign(static_cast<std::size_t>(cfg.base.dim()), Frac128{});
  cfg.g0 = GroupElement::Zero(cfg.group.dim());
  if (raw.contains("start")) {
    check_keys(raw["start"], "start", {"x", "g"});
    if (raw["start"].contains("x")) {
      const json xs = raw["start"]["x"].is_array()
                          ? raw["start"]["x"]
                          : json::array({raw["start"]["x"]});
      if (xs.size() != static_cast<std::size_t>(cfg.base.dim()))
        throw ConfigError("start.x", "expected " +
                                         std::to_string(cfg.base.dim()) +
                                         " coordinates");
      for (std::size_t i = 0; i < xs.size(); ++i)
        cfg.x0.coords[i] = parse_point_coord(
            xs[i], "start.x[" + std::to_string(i) + "]");
    }
    if (raw["start"].contains("g")) {
      const auto& gs = raw["start"]["g"];
      if (!gs.is_array() ||
          gs.size() != static_cast<std::size_t>(cfg.group.dim()))
        throw ConfigError("start.g", "expected " +
                                         std::to_string(cfg.group.dim()) +
                                         " coordinates");
      for (std::size_t i = 0; i < gs.size(); ++i)
        cfg.g0[static_cast<Eigen::Index>(i)] =
            need_number(gs[i], "start.g[" + std::to_string(i) + "]");
    }
  }

  // budgets
  if (raw.contains("N") && raw.contains("budgets") &&
      raw["budgets"].contains("N"))
    throw ConfigError("N", "given both at top level and in budgets");
  if (raw.contains("budgets")) {
    check_keys(raw["budgets"], "budgets", {"N", "max_seconds"});
    if (raw["budgets"].contains("N"))
      cfg.N = static_cast<std::int64_t>(
          need_number(raw["budgets"]["N"], "budgets.N"));
    if (raw["budgets"].contains("max_seconds"))
      cfg.max_seconds =
          need_number(raw["budgets"]["max_seconds"], "budgets.max_seconds");
  }
  if (raw.contains("N"))
    cfg.N = static_cast<std::int64_t>(need_number(raw["N"], "N"));
  if (cfg.N < 1 || cfg.N > 1'000'000'000)
    throw ConfigError("budgets.N", "N must be in [1, 1e9]");
  if (!(cfg.max_seconds > 0.0))
    throw ConfigError("budgets.max_seconds", "must be positive");

  // tolerances
  cfg.eps = {0.05, 0.02, 0.01};
  bool scale_given = false;
  if (raw.contains("tolerances")) {
    const json& t = raw["tolerances"];
    check_keys(t, "tolerances", {"eps", "eta", "r", "W", "grid", "scale"});
    if (t.contains("eps")) {
      if (!t["eps"].is_array() || t["eps"].empty())
        throw ConfigError("tolerances.eps", "expected a nonempty array");
      cfg.eps.clear();
      for (std::size_t i = 0; i < t["eps"].size(); ++i)
        cfg.eps.push_back(need_number(
            t["eps"][i], "tolerances.eps[" + std::to_string(i) + "]"));
    }
    if (t.contains("eta")) cfg.eta = need_number(t["eta"], "tolerances.eta");
    if (t.contains("r")) cfg.r = need_number(t["r"], "tolerances.r");
    if (t.contains("W")) cfg.W = need_number(t["W"], "tolerances.W");
    if (t.contains("grid"))
      cfg.grid = need_number(t["grid"], "tolerances.grid");
    if (t.contains("scale")) {
      cfg.scale = need_number(t["scale"], "tolerances.scale");
      scale_given = true;
    }
  }
  if (!scale_given) cfg.scale = 3.0 * cfg.r;
  {
    double prev = kInf;
    for (double e : cfg.eps) {
      if (!(e > 0.0) || !(e < prev))
        throw ConfigError("tolerances.eps",
                          "schedule must be positive and strictly decreasing");
      prev = e;
    }
    if (!(cfg.eta > 0.0)) throw ConfigError("tolerances.eta", "must be positive");
    if (!(cfg.r > 0.0)) throw ConfigError("tolerances.r", "must be positive");
    if (!(cfg.W > 0.0)) throw ConfigError("tolerances.W", "must be positive");
    if (!(cfg.grid > 0.0) || cfg.grid > 0.25)
      throw ConfigError("tolerances.grid", "must be in (0, 0.25]");
    if (!(cfg.scale >= cfg.r))
      throw ConfigError("tolerances.scale", "must be at least r");
  }

  if (raw.contains("seed")) {
    if (!raw["seed"].is_number_integer() && !raw["seed"].is_number_unsigned())
      throw ConfigError("seed", "expected an integer");
    cfg.seed = raw["seed"].get<std::uint64_t>();
  }
  if (raw.contains("samples")) {
    const double s = need_number(raw["samples"], "samples");
    if (s < 1 || s > 64) throw ConfigError("samples", "must be in [1, 64]");
    cfg.samples = static_cast<int>(s);
  }

  // diagnostics
  cfg.diagnostics = kAllDiagnostics;
  if (raw.contains("diagnostics")) {
    const json& d = raw["diagnostics"];
    if (d.is_string() && d.get<std::string>() == "all") {
      // keep default
    } else if (d.is_array()) {
      cfg.diagnostics.clear();
      for (const auto& name : d) {
        if (!name.is_string())
          throw ConfigError("diagnostics", "expected diagnostic name strings");
        const std::string s = name.get<std::string>();
        if (std::find(kAllDiagnostics.begin(), kAllDiagnostics.end(), s) ==
            kAllDiagnostics.end())
          throw ConfigError("diagnostics", "unknown diagnostic '" + s + "'");
        cfg.diagnostics.push_back(s);
      }
    } else {
      throw ConfigError("diagnostics", "expected \"all\" or an array");
    }
  }

  if (raw.contains("subgroup"))
    cfg.subgroup = parse_subgroup(raw["subgroup"], "subgroup");
  if (raw.contains("selection"))
    cfg.selection = parse_subgroup(raw["selection"], "selection");

  // expectations
  if (raw.contains("expect")) {
    const json& e = raw["expect"];
    if (!e.is_object()) throw ConfigError("expect", "expected an object");
    for (auto it = e.begin(); it != e.end(); ++it) {
      const std::string& k = it.key();
      if (k == "profile") {
        if (!it->is_string())
          throw ConfigError("expect.profile", "expected a string verdict");
        const std::string v = it->get<std::string>();
        if (v != "bounded" && v != "growing" && v != "inconclusive")
          throw ConfigError("expect.profile",
                            "verdicts: bounded, growing, inconclusive");
        cfg.expect.profile = v;
      } else if (k == "p_empty") {
        if (!it->is_boolean())
          throw ConfigError("expect.p_empty", "expected a bool");
        cfg.expect.p_empty = it->get<bool>();
      } else if (k == "components") {
        if (!it->is_number_integer())
          throw ConfigError("expect.components", "expected an integer");
        cfg.expect.components = it->get<int>();
      } else if (it->is_number()) {
        cfg.expect.scalar_max[k] = it->get<double>();
      } else {
        throw ConfigError("expect." + k, "expected a number cap");
      }
    }
  }

  // canonical echo
  json echo;
  {
    json a = json::array();
    for (const auto& al : cfg.base.alpha()) a.push_back(al.to_hex());
    echo["base"] = {{"alpha", a}, {"tag", to_string(cfg.base.tag())}};
    echo["group"] = cfg.group.tag();
    echo["cocycle"] = {{"tag", cfg.cocycle_tag},
                       {"params", cfg.cocycle_params}};
    json xs = json::array();
    for (const auto& c : cfg.x0.coords) xs.push_back(c.to_hex());
    json gs = json::array();
    for (int i = 0; i < cfg.group.dim(); ++i) gs.push_back(cfg.g0[i]);
    echo["start"] = {{"x", xs}, {"g", gs}};
    echo["budgets"] = {{"N", cfg.N}, {"max_seconds", cfg.max_seconds}};
    echo["tolerances"] = {{"eps", cfg.eps}, {"eta", cfg.eta}, {"r", cfg.r},
                          {"W", cfg.W},     {"grid", cfg.grid},
                          {"scale", cfg.scale}};
    echo["seed"] = cfg.seed;
    echo["samples"] = cfg.samples;
    echo["diagnostics"] = cfg.diagnostics;
    echo["subgroup"] = cfg.subgroup ? json(cfg.subgroup->tag()) : json();
    echo["selection"] = cfg.selection ? json(cfg.selection->tag()) : json();
    json ex = json::object();
    for (const auto& [k, v] : cfg.expect.scalar_max) ex[k] = v;
    if (!cfg.expect.profile.empty()) ex["profile"] = cfg.expect.profile;
    if (cfg.expect.p_empty) ex["p_empty"] = *cfg.expect.p_empty;
    if (cfg.expect.components) ex["components"] = *cfg.expect.components;
    echo["expect"] = ex;
  }
  cfg.resolved = std::move(echo);
  return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open config file");
  json raw;
  try {
    raw = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path, e.what());
  }
  return parse_config_json(raw);
}

std::string config_hash(const ScenarioConfig& c) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(c.resolved.dump())));
  return buf;
}

namespace {

// ---------------------------------------------------------------------------
// oracle paths: linear-scan return times, stepwise products, no walkers

std::vector<std::int64_t> oracle_hits(const RotationSystem& base, double eps,
                                      std::int64_t N, bool* truncated) {
  const ReturnTimes rt = brute_force_return_times(base, eps, N);
  if (truncated) *truncated = rt.truncated;
  return rt.times;
}

struct OracleAccum {
  // plain left accumulation: g(n+1) = gen(T^n x) . g(n)
  const Cocycle* f;
  TorusPoint fwd_pt;
  GroupElement fwd_val;
  TorusPoint bwd_pt;
  GroupElement bwd_val;

  explicit OracleAccum(const Cocycle& c, const TorusPoint& x)
      : f(&c),
        fwd_pt(x),
        fwd_val(GroupElement::Zero(c.target().dim())),
        bwd_pt(x),
        bwd_val(GroupElement::Zero(c.target().dim())) {}

  void step_forward() {
    const GroupElement gen = evaluate_generator(*f, fwd_pt);
    fwd_val = compose(f->target(), gen, fwd_val);
    rotate_inplace(f->base(), fwd_pt, 1);
  }
  void step_backward() {
    rotate_inplace(f->base(), bwd_pt, -1);
    const GroupElement gen =
        invert(f->target(), evaluate_generator(*f, bwd_pt));
    bwd_val = compose(f->target(), bwd_val, gen);
  }
};

struct OracleCollected {
  std::vector<GroupElement> values;
  std::vector<PointOrigin> origins;  // level holds the deepest schedule level
};

OracleCollected oracle_collect(const Cocycle& f, const TorusPoint& y,
                               int sample, const std::vector<std::int64_t>& hits,
                               const std::vector<int>& deepest) {
  OracleCollected out;
  if (hits.empty()) return out;
  OracleAccum acc(f, y);
  std::size_t hi = 0;
  const std::int64_t last = hits.back();
  for (std::int64_t n = 1; n <= last; ++n) {
    acc.step_forward();
    acc.step_backward();
    if (hi < hits.size() && n == hits[hi]) {
      out.values.push_back(acc.fwd_val);
      out.origins.push_back(PointOrigin{n, sample, deepest[hi]});
      out.values.push_back(acc.bwd_val);
      out.origins.push_back(PointOrigin{-n, sample, deepest[hi]});
      ++hi;
    }
  }
  return out;
}

std::vector<int> oracle_levels(const RotationSystem& base,
                               const std::vector<std::int64_t>& hits,
                               const std::vector<double>& eps_schedule) {
  std::vector<int> deepest(hits.size(), 0);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    TorusPoint zero;
    zero.coords.assign(static_cast<std::size_t>(base.dim()), Frac128{});
    const TorusPoint moved = rotate(base, zero, hits[i]);
    const double res = base_distance(base, moved, zero);
    int d = 0;
    while (d < static_cast<int>(eps_schedule.size()) && res < eps_schedule[d])
      ++d;
    deepest[i] = d;
  }
  return deepest;
}

SetEstimate oracle_estimate_P(const Cocycle& f, const TorusPoint& x,
                              const std::vector<double>& eps, std::int64_t N,
                              double r, double W) {
  bool trunc = false;
  const std::vector<std::int64_t> hits =
      oracle_hits(f.base(), eps[0], N, &trunc);
  const std::vector<int> deepest = oracle_levels(f.base(), hits, eps);
  const OracleCollected got = oracle_collect(f, x, 0, hits, deepest);

  const int K = static_cast<int>(eps.size());
  const GroupInstance& G = f.target();
  // per-level greedy dedup in collection order, band W + r
  std::vector<std::vector<GroupElement>> kept(static_cast<std::size_t>(K));
  std::vector<std::vector<PointOrigin>> korg(static_cast<std::size_t>(K));
  bool escape = false;
  for (std::size_t i = 0; i < got.values.size(); ++i) {
    const GroupElement& v = got.values[i];
    const double nrm = group_norm(G, v);
    if (nrm > W) {
      escape = true;
      if (nrm > W + r) continue;
    }
    for (int k = 0; k < got.origins[i].level; ++k) {
      auto& lane = kept[static_cast<std::size_t>(k)];
      bool dup = false;
      for (const auto& p : lane)
        if (group_distance(G, p, v) <= r) {
          dup = true;
          break;
        }
      if (!dup) {
        lane.push_back(v);
        korg[static_cast<std::size_t>(k)].push_back(got.origins[i]);
      }
    }
  }
  std::vector<GroupElement> pool;
  std::vector<PointOrigin> porg;
  if (K == 1) {
    pool = kept[0];
    porg = korg[0];
  } else {
    pool = kept[1];
    porg = korg[1];
    for (std::size_t i = 0; i < kept[0].size(); ++i)
      for (const auto& q : kept[1])
        if (group_distance(G, kept[0][i], q) <= r) {
          pool.push_back(kept[0][i]);
          porg.push_back(korg[0][i]);
          break;
        }
  }
  SetEstimate out = build_estimate(G, pool, porg, r, W, "P-estimate");
  out.flags.no_return_times = hits.empty();
  out.flags.window_escape = escape;
  out.flags.truncated = trunc;
  out.eps_schedule = eps;
  out.N = N;
  out.samples = 1;
  return out;
}

SetEstimate oracle_estimate_E(const Cocycle& f, const TorusPoint& x,
                              double eps, double eta, int m, std::int64_t N,
                              double r, double W, std::uint64_t seed) {
  bool trunc = false;
  const std::vector<std::int64_t> hits = oracle_hits(f.base(), eps, N, &trunc);
  const std::vector<int> deepest(hits.size(), 1);
  const GroupInstance& G = f.target();

  std::vector<GroupElement> kept;
  std::vector<PointOrigin> korg;
  bool escape = false;
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
    const OracleCollected got = oracle_collect(f, y, s, hits, deepest);
    for (std::size_t i = 0; i < got.values.size(); ++i) {
      const GroupElement& v = got.values[i];
      const double nrm = group_norm(G, v);
      if (nrm > W) {
        escape = true;
        if (nrm > W + r) continue;
      }
      bool dup = false;
      for (const auto& p : kept)
        if (group_distance(G, p, v) <= r) {
          dup = true;
          break;
        }
      if (!dup) {
        kept.push_back(v);
        korg.push_back(got.origins[i]);
      }
    }
  }
  SetEstimate out = build_estimate(G, kept, korg, r, W, "E-estimate");
  out.flags.no_return_times = hits.empty();
  out.flags.window_escape = escape;
  out.flags.truncated = trunc;
  out.eps_schedule = {eps};
  out.N = N;
  out.eta = eta;
  out.samples = m;
  return out;
}

OrbitClosureSample oracle_sample(const Cocycle& f, const SkewState& s0,
                                 std::int64_t N, const StridePlan& plan,
                                 const std::optional<SubgroupSpec>& H) {
  // stepwise walk mirrored into the same sample layout
  check_point(f.base(), s0.x);
  check_element(f.target(), s0.g);
  std::int64_t stride = plan.stride;
  if (stride == 0) {
    stride = 1;
    if (N > 0 && 2 * N + 1 > plan.max_states)
      stride = (2 * N) / std::max<std::int64_t>(plan.max_states - 1, 1) + 1;
  }
  const std::int64_t K = N / stride;

  const GroupInstance& G = f.target();
  OrbitClosureSample out(G);
  out.H = H;
  out.coverage_grid = plan.coverage_grid;

  OracleAccum acc(f, s0.x);
  std::vector<std::int64_t> bns;
  std::vector<SkewState> bst;
  for (std::int64_t n = 1; n <= K * stride; ++n) {
    acc.step_backward();
    if (n % stride == 0) {
      bns.push_back(-n);
      bst.push_back(SkewState{acc.bwd_pt, compose(G, acc.bwd_val, s0.g)});
    }
  }
  for (std::size_t i = bns.size(); i-- > 0;) {
    out.ns.push_back(bns[i]);
    out.states.push_back(std::move(bst[i]));
  }
  out.ns.push_back(0);
  out.states.push_back(s0);
  for (std::int64_t n = 1; n <= K * stride; ++n) {
    acc.step_forward();
    if (n % stride == 0) {
      out.ns.push_back(n);
      out.states.push_back(
          SkewState{acc.fwd_pt, compose(G, acc.fwd_val, s0.g)});
    }
  }

  const int dim = f.base().dim();
  const auto cpd =
      static_cast<std::int64_t>(std::ceil(1.0 / plan.coverage_grid));
  std::int64_t cells = 1;
  for (int i = 0; i < dim; ++i) cells *= cpd;
  out.coverage.assign(static_cast<std::size_t>(cells), 0);
  for (const SkewState& st : out.states) {
    std::int64_t idx = 0;
    for (int i = 0; i < dim; ++i) {
      auto c = static_cast<std::int64_t>(st.x.coords[i].to_double() *
                                         static_cast<double>(cpd));
      c = std::min(c, cpd - 1);
      idx = idx * cpd + c;
    }
    ++out.coverage[static_cast<std::size_t>(idx)];
    GroupElement rep = H ? quotient_project(G, *H, st.g) : st.g;
    out.running_radius = std::max(out.running_radius, group_norm(G, rep));
    if (H) out.reduced.push_back(std::move(rep));
  }
  return out;
}

// ---------------------------------------------------------------------------
// artifact writers

void write_estimate_csv(const fs::path& path, const SetEstimate& est) {
  std::ofstream out(path, std::ios::binary);
  out << "index,n,sample,level";
  for (int i = 0; i < est.group.dim(); ++i) out << ",c" << i;
  out << "\n";
  for (std::size_t i = 0; i < est.points.size(); ++i) {
    out << i << ',' << est.origins[i].n << ',' << est.origins[i].sample << ','
        << est.origins[i].level;
    for (int c = 0; c < est.group.dim(); ++c)
      out << ',' << fmt_g(est.points[i][c]);
    out << "\n";
  }
}

void write_profile_csv(const fs::path& path,
                       const std::vector<ProfilePoint>& profile) {
  std::ofstream out(path, std::ios::binary);
  out << "N,radius\n";
  for (const auto& p : profile)
    out << p.N << ',' << fmt_g(p.radius) << "\n";
}

void write_gamma_csv(const fs::path& path,
                     const std::vector<ModulusPoint>& env) {
  std::ofstream out(path, std::ios::binary);
  out << "base,fiber\n";
  for (const auto& p : env)
    out << fmt_g(p.base_dist) << ',' << fmt_g(p.fiber_dist) << "\n";
}

json flags_json(const EstimateFlags& f) {
  return {{"no_return_times", f.no_return_times},
          {"window_escape", f.window_escape},
          {"truncated", f.truncated}};
}

// ---------------------------------------------------------------------------

struct Clock {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double limit = 0.0;
  bool hit = false;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
  bool ok() {
    if (!hit && elapsed() > limit) hit = true;
    return !hit;
  }
};

RunReport run_impl(const ScenarioConfig& cfg, const RunOptions& opt,
                   bool oracle_mode) {
  if (oracle_mode && cfg.N > 10'000'000)
    throw BudgetError("oracle mode accepts N up to 1e7, got " +
                          std::to_string(cfg.N),
                      0);

  Clock clock;
  clock.limit = cfg.max_seconds;

  RunReport rep;
  rep.config_echo = cfg.resolved;
  rep.outdir = (fs::path(opt.out_base) /
                (config_hash(cfg) + (oracle_mode ? "-oracle" : "")))
                   .string();

  const Cocycle f =
      make_named_cocycle(cfg.cocycle_tag, cfg.base, cfg.group, cfg.cocycle_params);
  const GroupInstance& G = f.target();
  const SubgroupSpec H = cfg.subgroup.value_or(SubgroupSpec::trivial());

  auto expect_max = [&](const std::string& name, double dflt) {
    auto it = cfg.expect.scalar_max.find(name);
    return it != cfg.expect.scalar_max.end() ? it->second : dflt;
  };
  auto add = [&](std::string name, double value, double tol, bool pass,
                 std::string detail = "") {
    rep.diagnostics.entries.push_back(
        Diagnostic{std::move(name), value, tol, pass, std::move(detail)});
  };
  auto want = [&](const char* name) {
    return std::find(cfg.diagnostics.begin(), cfg.diagnostics.end(), name) !=
           cfg.diagnostics.end();
  };
  auto flag_note = [](const EstimateFlags& fl) {
    std::string s;
    if (fl.no_return_times) s += " no-return-times";
    if (fl.window_escape) s += " window-escape";
    if (fl.truncated) s += " truncated";
    return s.empty() ? std::string("clean") : s.substr(1);
  };

  // estimates first
  SetEstimate P =
      oracle_mode
          ? oracle_estimate_P(f, cfg.x0, cfg.eps, cfg.N, cfg.r, cfg.W)
          : estimate_P(f, cfg.x0, cfg.eps, cfg.N, cfg.r, cfg.W);
  rep.steps += 2 * cfg.N;
  SetEstimate E = oracle_mode
                      ? oracle_estimate_E(f, cfg.x0, cfg.eps.back(), cfg.eta,
                                          cfg.samples, cfg.N, cfg.r, cfg.W,
                                          cfg.seed)
                      : estimate_E(f, cfg.x0, cfg.eps.back(), cfg.eta,
                                   cfg.samples, cfg.N, cfg.r, cfg.W, cfg.seed);
  rep.steps += 2 * cfg.N * cfg.samples;
  rep.truncated = rep.truncated || P.flags.truncated || E.flags.truncated;

  {
    const bool expect_empty = cfg.expect.p_empty.value_or(false);
    const bool pass =
        expect_empty
            ? (P.points.empty() &&
               (P.flags.window_escape || P.flags.no_return_times))
            : !P.points.empty();
    add("p_points", static_cast<double>(P.points.size()),
        expect_empty ? 0.0 : 1.0, pass, "flags: " + flag_note(P.flags));
    if (expect_empty && pass)
      rep.diagnostics.notes.push_back(
          "transience evidence: recurrent-value estimate empty with " +
          flag_note(P.flags));
  }
  {
    double radius = 0.0;
    for (const auto& p : E.points)
      radius = std::max(radius, group_norm(G, p));
    const double tol = expect_max("e_radius", kInf);
    add("e_radius", radius, tol, radius <= tol,
        std::to_string(E.points.size()) + " points, flags: " +
            flag_note(E.flags));
    if (!E.points.empty() && radius <= std::max(3.0 * cfg.r, 1e-12))
      rep.diagnostics.notes.push_back(
          "essential range concentrated at the identity (radius " +
          fmt_g(radius) + ")");
  }

  // orbit sample feeds everything downstream
  StridePlan plan;
  plan.coverage_grid = cfg.grid;
  OrbitClosureSample sample =
      oracle_mode
          ? oracle_sample(f, SkewState{cfg.x0, cfg.g0}, cfg.N, plan,
                          cfg.subgroup)
          : sample_orbit_closure(f, SkewState{cfg.x0, cfg.g0}, cfg.N, plan,
                                 cfg.subgroup);
  rep.steps += 2 * cfg.N;
  rep.truncated = rep.truncated || sample.truncated;

  SetEstimate section(G);
  bool have_section = false;

  if (clock.ok() && want("surjectivity")) {
    const double defect = surjectivity_defect(sample, cfg.grid);
    const double tol = expect_max("surjectivity", cfg.grid);
    add("surjectivity", defect, tol, defect <= tol,
        "grid " + fmt_g(cfg.grid));
  }

  if (clock.ok() && want("profile")) {
    std::vector<std::int64_t> checkpoints;
    for (std::int64_t c = 1000; c < cfg.N; c *= 10) checkpoints.push_back(c);
    if (checkpoints.empty() && cfg.N > 1)
      checkpoints.push_back(std::max<std::int64_t>(1, cfg.N / 10));
    checkpoints.push_back(cfg.N);
    rep.diagnostics.profile = compactness_profile(sample, H, checkpoints);
    rep.diagnostics.profile_verdict =
        classify_profile(rep.diagnostics.profile);
    const std::string expected =
        cfg.expect.profile.empty() ? "bounded" : cfg.expect.profile;
    const std::string got = to_string(rep.diagnostics.profile_verdict);
    const double last = rep.diagnostics.profile.back().radius;
    const double tol = expect_max("profile", kInf);
    add("profile", last, tol, got == expected && last <= tol,
        "verdict " + got + ", expected " + expected);
    if (got == "growing")
      rep.diagnostics.notes.push_back(
          "transience evidence: coset radius profile grows through every "
          "checkpoint");
  }

  if (clock.ok() && want("section")) {
    section = vertical_section(sample, cfg.x0, cfg.eta, cfg.r, cfg.W);
    have_section = true;
    if (section.points.empty()) {
      add("section", 0.0, 0.0, false, "empty section at x0");
    } else {
      const double defect = section_coset_defect(section, H);
      const double tol = expect_max("section", 2.0 * cfg.r);
      add("section", defect, tol, defect <= tol,
          std::to_string(section.points.size()) + " points, subgroup " +
              H.tag());
    }
  }

  if (clock.ok() && want("gamma")) {
    std::vector<std::pair<TorusPoint, GroupElement>> anchors;
    const std::size_t targets = 16;
    for (std::size_t k = 0; k < targets && k < sample.states.size(); ++k) {
      const std::size_t idx = k * sample.states.size() / targets;
      const TorusPoint& xi = sample.states[idx].x;
      const SetEstimate sec =
          vertical_section(sample, xi, cfg.eta, cfg.r, cfg.W);
      if (sec.points.empty()) continue;
      std::size_t best = 0;
      for (std::size_t i = 1; i < sec.points.size(); ++i)
        if (group_norm(G, sec.points[i]) < group_norm(G, sec.points[best]))
          best = i;
      anchors.emplace_back(xi, sec.points[best]);
    }
    if (anchors.size() < 2) {
      add("gamma", 0.0, 0.0, true, "skipped: fewer than 2 anchors");
    } else {
      const auto scatter = gamma_modulus(cfg.base, G, H, anchors);
      rep.diagnostics.gamma = modulus_envelope(scatter);
      double near = 0.0;
      for (const auto& p : scatter)
        if (p.base_dist <= cfg.grid) near = std::max(near, p.fiber_dist);
      const double tol = expect_max("gamma", kInf);
      add("gamma", near, tol, near <= tol,
          std::to_string(anchors.size()) + " anchors, fiber spread at base "
                                           "distance <= " +
              fmt_g(cfg.grid));
    }
  }

  if (clock.ok() && want("stabilizer")) {
    if (E.points.empty()) {
      add("stabilizer", 0.0, 0.0, true, "skipped: empty probe estimate");
    } else {
      SetEstimate probes = E;
      if (probes.points.size() > 48) {
        const std::size_t stride = probes.points.size() / 48 + 1;
        std::vector<GroupElement> pts;
        std::vector<PointOrigin> org;
        for (std::size_t i = 0; i < probes.points.size(); i += stride) {
          pts.push_back(probes.points[i]);
          org.push_back(probes.origins[i]);
        }
        probes.points = std::move(pts);
        probes.origins = std::move(org);
      }
      const auto cands = stabilizer_candidates(sample, probes);
      double best = kInf;
      int within = 0;
      const double tol = expect_max("stabilizer", 3.0 * cfg.r);
      for (const auto& c : cands) {
        best = std::min(best, c.defect);
        if (c.defect <= tol) ++within;
      }
      add("stabilizer", best, tol, best <= tol,
          std::to_string(within) + " of " + std::to_string(cands.size()) +
              " probes within tolerance");
    }
  }

  if (clock.ok() && want("components")) {
    if (E.points.empty()) {
      const bool expected_any = cfg.expect.components.has_value();
      add("components", 0.0,
          static_cast<double>(cfg.expect.components.value_or(1)),
          !expected_any, "skipped: empty estimate");
    } else {
      const ComponentSplit split = connected_components(E, cfg.scale);
      const int expected = cfg.expect.components.value_or(1);
      const auto count = static_cast<int>(split.components.size());
      std::string detail = "scale " + fmt_g(cfg.scale);
      if (!split.gaps.empty())
        detail += ", smallest gap " + fmt_g(split.gaps.front());
      add("components", count, expected, count == expected, detail);
    }
  }

  if (clock.ok() && want("selection") && cfg.selection) {
    std::vector<std::pair<TorusPoint, std::int64_t>> sel_samples;
    for (std::int64_t n : {std::int64_t(1), std::int64_t(5), std::int64_t(19),
                           std::int64_t(67)})
      if (n <= cfg.N) sel_samples.emplace_back(cfg.x0, n);
    const SelectionDefect d =
        consistent_selection_defect(f, *cfg.selection, sel_samples, E);
    const double ctol = expect_max("selection_conjugation", 1e-9);
    add("selection_conjugation", d.conjugation, ctol, d.conjugation <= ctol,
        "selection " + cfg.selection->tag());
    const double itol = expect_max("selection_containment", 3.0 * cfg.r);
    add("selection_containment", d.containment, itol, d.containment <= itol,
        "generator cloud against the essential-range estimate");
  }

  if (clock.ok() && want("semigroup")) {
    const std::optional<double> d = semigroup_defect(P);
    if (!d) {
      add("semigroup", 0.0, 0.0, true, "skipped: empty estimate");
    } else {
      const double tol = expect_max("semigroup", 3.0 * cfg.r);
      add("semigroup", *d, tol, *d <= tol,
          "pairwise products against the estimate");
    }
  }

  if (clock.ok() && want("inclusion")) {
    if (!have_section)
      section = vertical_section(sample, cfg.x0, cfg.eta, cfg.r, cfg.W);
    // quotient cloud { q p^{-1} : p, q in section }, capped and clipped
    std::vector<const GroupElement*> secpts;
    {
      const std::size_t cap = 300;
      const std::size_t stride =
          section.points.empty() ? 1 : section.points.size() / cap + 1;
      for (std::size_t i = 0; i < section.points.size(); i += stride)
        secpts.push_back(&section.points[i]);
    }
    std::vector<GroupElement> quot;
    for (const auto* p : secpts) {
      const GroupElement pinv = invert(G, *p);
      for (const auto* q : secpts) {
        GroupElement v = compose(G, *q, pinv);
        if (group_norm(G, v) <= cfg.W) quot.push_back(std::move(v));
      }
    }
    double p_defect = 0.0;
    for (const auto& v : P.points) {
      double bestd = kInf;
      for (const auto& q : quot)
        bestd = std::min(bestd, group_distance(G, v, q));
      p_defect = std::max(p_defect, bestd);
    }
    double e_defect = 0.0;
    if (!quot.empty() && !E.points.empty()) {
      for (const auto& q : quot) {
        if (group_norm(G, q) > cfg.W - 4.0 * cfg.r) continue;
        double bestd = kInf;
        for (const auto& p : E.points)
          bestd = std::min(bestd, group_distance(G, q, p));
        e_defect = std::max(e_defect, bestd);
      }
    }
    const double ptol = expect_max("inclusion_p", 3.0 * cfg.r);
    add("inclusion_p", p_defect, ptol, p_defect <= ptol,
        P.points.empty()
            ? "vacuous: no recurrent values inside the window"
            : "recurrent values inside the section quotient cloud");
    const double etol = expect_max("inclusion_e", 3.0 * cfg.r);
    add("inclusion_e", e_defect, etol, e_defect <= etol,
        quot.empty() || E.points.empty()
            ? "vacuous: essential-range window has no data to compare"
            : "section quotients inside the essential-range estimate");
  }

  if (clock.hit) rep.truncated = true;

  // exit code
  bool any_fail = false;
  for (const auto& e : rep.diagnostics.entries)
    if (!e.pass) any_fail = true;
  rep.exit_code = rep.truncated ? 3 : (any_fail ? 2 : 0);
  rep.wall_seconds = clock.elapsed();

  // artifacts
  fs::create_directories(rep.outdir);
  const fs::path dir(rep.outdir);
  auto record = [&](const char* name, const SetEstimate& est,
                    const char* file) {
    write_estimate_csv(dir / file, est);
    EstimateArtifact art;
    art.name = name;
    art.path = file;
    art.points = static_cast<int>(est.points.size());
    art.r = est.r;
    art.W = est.W;
    art.flags = est.flags;
    art.note = est.note;
    rep.estimates.push_back(std::move(art));
  };
  record("P", P, "estimate_P.csv");
  record("E", E, "estimate_E.csv");
  if (have_section || !section.points.empty())
    record("section", section, "estimate_section.csv");
  if (!rep.diagnostics.profile.empty())
    write_profile_csv(dir / "profile_radius.csv", rep.diagnostics.profile);
  if (!rep.diagnostics.gamma.empty())
    write_gamma_csv(dir / "profile_gamma.csv", rep.diagnostics.gamma);

  json jr;
  jr["schema_version"] = rep.schema_version;
  jr["mode"] = oracle_mode ? "oracle" : "fast";
  jr["config"] = rep.config_echo;
  jr["diagnostics"] = diagnostics_to_json(rep.diagnostics);
  jr["estimates"] = json::array();
  for (const auto& a : rep.estimates)
    jr["estimates"].push_back({{"name", a.name},
                               {"path", a.path},
                               {"points", a.points},
                               {"r", a.r},
                               {"W", a.W},
                               {"flags", flags_json(a.flags)},
                               {"note", a.note}});
  jr["steps"] = rep.steps;
  jr["truncated"] = rep.truncated;
  jr["exit_code"] = rep.exit_code;
  {
    std::ofstream out(dir / "report.json", std::ios::binary);
    out << jr.dump(2) << "\n";
  }
  {
    std::ofstream out(dir / "report.txt", std::ios::binary);
    out << "mode: " << (oracle_mode ? "oracle" : "fast") << "\n";
    out << "config hash: " << config_hash(cfg) << "\n";
    out << "group: " << G.tag() << ", cocycle: " << cfg.cocycle_tag << "\n";
    out << diagnostics_to_text(rep.diagnostics);
    for (const auto& a : rep.estimates)
      out << "estimate " << a.name << ": " << a.points << " points -> "
          << a.path << "\n";
    out << "steps: " << rep.steps << "\n";
    out << "wall seconds: " << rep.wall_seconds << "\n";
    out << "exit code: " << rep.exit_code << "\n";
  }

  if (!opt.quiet) {
    std::printf("%s -> %s (exit %d)\n", oracle_mode ? "oracle" : "fast",
                rep.outdir.c_str(), rep.exit_code);
  }
  return rep;
}

ScenarioConfig with_overrides(const ScenarioConfig& c, const RunOptions& opt) {
  ScenarioConfig cfg = c;
  if (opt.seed) {
    cfg.seed = *opt.seed;
    cfg.resolved["seed"] = *opt.seed;
  }
  if (opt.max_seconds) {
    cfg.max_seconds = *opt.max_seconds;
    cfg.resolved["budgets"]["max_seconds"] = *opt.max_seconds;
  }
  return cfg;
}

}  // namespace

RunReport run_scenario(const ScenarioConfig& c, const RunOptions& opt) {
  return run_impl(with_overrides(c, opt), opt, false);
}

RunReport run_oracle(const ScenarioConfig& c, const RunOptions& opt) {
  return run_impl(with_overrides(c, opt), opt, true);
}

namespace {

json load_report(const fs::path& dir) {
  std::ifstream in(dir / "report.json");
  if (!in)
    throw ConfigError((dir / "report.json").string(), "cannot open report");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError((dir / "report.json").string(), e.what());
  }
}

std::vector<GroupElement> load_estimate_csv(const fs::path& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open estimate csv");
  std::string line;
  std::getline(in, line);  // header
  std::vector<GroupElement> pts;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != 4 + dim)
      throw ConfigError(path.string(), "unexpected column count");
    GroupElement g(dim);
    for (int i = 0; i < dim; ++i) g[i] = vals[static_cast<std::size_t>(4 + i)];
    pts.push_back(std::move(g));
  }
  return pts;
}

}  // namespace

CompareSummary compare_runs(const std::string& dir_a,
                            const std::string& dir_b) {
  const json ja = load_report(dir_a);
  const json jb = load_report(dir_b);
  if (ja.value("schema_version", -1) != jb.value("schema_version", -2))
    throw Error("schema version mismatch: " +
                ja.value("schema_version", json()).dump() + " vs " +
                jb.value("schema_version", json()).dump());

  CompareSummary out;
  auto row = [&](std::string name, double a, double b, double tol) {
    CompareRow r;
    r.name = std::move(name);
    r.a = a;
    r.b = b;
    r.diff = std::fabs(a - b);
    r.tol = tol;
    r.pass = r.diff <= tol;
    if (!r.pass) out.all_pass = false;
    out.rows.push_back(std::move(r));
  };

  const double ra = ja["config"]["tolerances"]["r"].get<double>();
  const double rb = jb["config"]["tolerances"]["r"].get<double>();
  const double est_tol = 2.0 * std::max(ra, rb);

  // scalar diagnostics by name
  std::map<std::string, double> sa, sb;
  for (const auto& e : ja["diagnostics"]["entries"])
    sa[e["name"].get<std::string>()] = e["value"].get<double>();
  for (const auto& e : jb["diagnostics"]["entries"])
    sb[e["name"].get<std::string>()] = e["value"].get<double>();
  for (const auto& [name, va] : sa) {
    auto it = sb.find(name);
    if (it == sb.end()) {
      row("scalar " + name + " (missing in b)", va, 0.0, -1.0);
      continue;
    }
    // point counts jitter with the seed; everything else is r-scale
    const double tol = name == "p_points"
                           ? std::max(3.0, 0.1 * std::max(va, it->second))
                           : est_tol;
    row("scalar " + name, va, it->second, tol);
  }
  for (const auto& [name, vb] : sb)
    if (!sa.count(name)) row("scalar " + name + " (missing in a)", 0.0, vb, -1.0);

  // estimate clouds by Hausdorff distance
  const GroupInstance Ga =
      GroupInstance::from_tag(ja["config"]["group"].get<std::string>());
  const GroupInstance Gb =
      GroupInstance::from_tag(jb["config"]["group"].get<std::string>());
  std::map<std::string, json> ea, eb;
  for (const auto& e : ja["estimates"]) ea[e["name"].get<std::string>()] = e;
  for (const auto& e : jb["estimates"]) eb[e["name"].get<std::string>()] = e;
  for (const auto& [name, meta_a] : ea) {
    auto it = eb.find(name);
    if (it == eb.end()) {
      row("estimate_" + name + " (missing in b)",
          meta_a["points"].get<double>(), 0.0, -1.0);
      continue;
    }
    if (!(Ga == Gb)) {
      row("estimate_" + name + " (different groups)", 0.0, 0.0, -1.0);
      continue;
    }
    const json& meta_b = it->second;
    SetEstimate A(Ga), B(Gb);
    A.r = meta_a["r"].get<double>();
    A.W = meta_a["W"].get<double>();
    B.r = meta_b["r"].get<double>();
    B.W = meta_b["W"].get<double>();
    A.points = load_estimate_csv(fs::path(dir_a) /
                                     meta_a["path"].get<std::string>(),
                                 Ga.dim());
    B.points = load_estimate_csv(fs::path(dir_b) /
                                     meta_b["path"].get<std::string>(),
                                 Gb.dim());
    if (A.W != B.W) {
      row("estimate_" + name + " (different windows)", A.W, B.W, -1.0);
      continue;
    }
    A.origins.resize(A.points.size());
    B.origins.resize(B.points.size());
    row("estimate_" + name, hausdorff_distance(A, B), 0.0, est_tol);
  }

  std::string text;
  char line[256];
  std::snprintf(line, sizeof(line), "%-44s %12s %12s %10s %6s\n", "entry", "a",
                "b", "tol", "pass");
  text += line;
  for (const auto& r : out.rows) {
    std::snprintf(line, sizeof(line), "%-44s %12.6g %12.6g %10.4g %6s\n",
                  r.name.c_str(), r.a, r.b, r.tol, r.pass ? "yes" : "NO");
    text += line;
  }
  text += out.all_pass ? "all diffs within tolerance\n"
                       : "DIFFS ABOVE TOLERANCE\n";
  out.text = std::move(text);
  return out;
}

}  // namespace skewlab
