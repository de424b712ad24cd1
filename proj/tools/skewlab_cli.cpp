#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "skewlab/error.hpp"
#include "skewlab/scenario.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> max_seconds;
  std::string out = "runs";
  bool quiet = false;
};

void attach(CLI::App* cmd, CommonFlags& fl) {
  cmd->add_option("config", fl.config, "scenario config (json)")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", [&fl](const CLI::results_t& res) {
       fl.seed = std::stoull(res[0]);
       return true;
     },
     "override the config seed");
  cmd->add_option("--max-seconds", [&fl](const CLI::results_t& res) {
       fl.max_seconds = std::stod(res[0]);
       return true;
     },
     "override the wall budget");
  cmd->add_option("--out", fl.out, "parent directory for run artifacts");
  cmd->add_flag("--quiet", fl.quiet, "suppress progress output");
}

int execute(const CommonFlags& fl, bool oracle) {
  const skewlab::ScenarioConfig cfg = skewlab::parse_config(fl.config);
  skewlab::RunOptions opt;
  opt.seed = fl.seed;
  opt.max_seconds = fl.max_seconds;
  opt.out_base = fl.out;
  opt.quiet = fl.quiet;
  const skewlab::RunReport rep = oracle ? skewlab::run_oracle(cfg, opt)
                                        : skewlab::run_scenario(cfg, opt);
  return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cocycle range laboratory"};
  app.require_subcommand(1);

  CommonFlags run_fl, oracle_fl;
  CLI::App* run_cmd = app.add_subcommand("run", "execute a scenario");
  attach(run_cmd, run_fl);
  CLI::App* oracle_cmd =
      app.add_subcommand("oracle", "execute the slow independent path");
  attach(oracle_cmd, oracle_fl);

  std::string dir_a, dir_b;
  bool cmp_quiet = false;
  CLI::App* cmp_cmd = app.add_subcommand("compare", "diff two run directories");
  cmp_cmd->add_option("dirA", dir_a, "first run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmp_cmd->add_option("dirB", dir_b, "second run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  cmp_cmd->add_flag("--quiet", cmp_quiet, "suppress the diff table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return execute(run_fl, false);
    if (oracle_cmd->parsed()) return execute(oracle_fl, true);
    if (cmp_cmd->parsed()) {
      const skewlab::CompareSummary s = skewlab::compare_runs(dir_a, dir_b);
      if (!cmp_quiet) std::fputs(s.text.c_str(), stdout);
      return s.all_pass ? 0 : 2;
    }
  } catch (const skewlab::BudgetError& e) {
    std::fprintf(stderr, "budget: %s\n", e.what());
    return 3;
  } catch (const skewlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
