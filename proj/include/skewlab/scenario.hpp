#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "skewlab/analyzer.hpp"
#include "skewlab/cocycle.hpp"
#include "skewlab/estimate.hpp"
#include "skewlab/group.hpp"
#include "skewlab/rotation.hpp"

namespace skewlab {

inline constexpr int kSchemaVersion = 1;

/// Declared pass criteria. Scalar entries cap the diagnostic of the same
/// name; the rest override the built-in defaults (nonempty P, bounded
/// profile, one component).
struct Expectations {
  std::map<std::string, double> scalar_max;
  std::string profile;              // "", "bounded", "growing", "inconclusive"
  std::optional<bool> p_empty;
  std::optional<int> components;
};

struct ScenarioConfig {
  ScenarioConfig(RotationSystem b, GroupInstance g)
      : base(std::move(b)), group(std::move(g)) {}

  RotationSystem base;
  GroupInstance group;
  std::string cocycle_tag;
  nlohmann::json cocycle_params;
  TorusPoint x0;
  GroupElement g0;

  std::int64_t N = 1'000'000;
  double max_seconds = 300.0;

  std::vector<double> eps;  // schedule, strictly decreasing
  double eta = 0.05;
  double r = 0.05;
  double W = 8.0;
  double grid = 0.05;
  double scale = 0.15;
  int samples = 8;
  std::uint64_t seed = 1;

  std::vector<std::string> diagnostics;
  std::optional<SubgroupSpec> subgroup;
  std::optional<SubgroupSpec> selection;
  Expectations expect;

  /// Canonical echo with every default resolved; hashed for the output
  /// directory name.
  nlohmann::json resolved;
};

ScenarioConfig parse_config(const std::string& path);
ScenarioConfig parse_config_json(const nlohmann::json& raw);

/// FNV-1a over the canonical config echo, 16 hex digits.
std::string config_hash(const ScenarioConfig& c);

struct EstimateArtifact {
  std::string name;
  std::string path;
  int points = 0;
  double r = 0.0;
  double W = 0.0;
  EstimateFlags flags;
  std::string note;
};

struct RunReport {
  int schema_version = kSchemaVersion;
  nlohmann::json config_echo;
  DiagnosticsReport diagnostics;
  std::vector<EstimateArtifact> estimates;
  std::int64_t steps = 0;
  double wall_seconds = 0.0;  // report.txt only, kept out of json/csv
  bool truncated = false;
  int exit_code = 0;  // 0 ok, 2 defect above tolerance, 3 truncated
  std::string outdir;
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<double> max_seconds;
  std::string out_base = "runs";
  bool quiet = false;
};

/// Executes estimates and the requested diagnostics in a fixed order and
/// writes estimate_*.csv, profile_*.csv, report.json and report.txt under
/// <out_base>/<config hash>. Reruns with identical config and seed produce
/// byte-identical csv/json artifacts (wall time lives in report.txt only).
RunReport run_scenario(const ScenarioConfig& c, const RunOptions& opt = {});

/// Independent slow path: linear-scan return times, stepwise products, no
/// walker or tree evaluation. Same artifact schema, written under
/// <out_base>/<config hash>-oracle. Rejects N > 10^7.
RunReport run_oracle(const ScenarioConfig& c, const RunOptions& opt = {});

struct CompareRow {
  std::string name;
  double a = 0.0;
  double b = 0.0;
  double diff = 0.0;
  double tol = 0.0;
  bool pass = true;
};

struct CompareSummary {
  std::vector<CompareRow> rows;
  bool all_pass = true;
  std::string text;
};

/// Diffs two run directories: scalar diagnostics by name, estimate clouds
/// by Hausdorff distance at 2 max(rA, rB). Requires equal schema versions.
CompareSummary compare_runs(const std::string& dir_a, const std::string& dir_b);

}  // namespace skewlab
