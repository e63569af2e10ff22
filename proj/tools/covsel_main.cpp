// covsel: covariance model selection from the command line.
//
//   covsel select   --input data.csv [--config run.ini] [--out dir] [--theta 1.0]
//   covsel simulate --config sim.ini [--seed 7] [--threads 4]
//   covsel validate [--seed 0]
//
// Exit codes: 0 ok, 1 validation failure, 2 input/config error,
// 3 degenerate model collection.

#include <iostream>

#include "CLI11.hpp"
#include "covsel/cli.hpp"
#include "covsel/error.hpp"

namespace {

struct CommonFlags {
  std::string config;
  covsel::cli::Overrides overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "INI config file");
  cmd->add_option("--out", f.overrides.out, "output directory");
  cmd->add_option("--theta", f.overrides.theta, "penalty constant theta > 0");
  cmd->add_option("--seed", f.overrides.seed, "RNG seed");
  cmd->add_option("--threads", f.overrides.threads, "worker threads (default 1)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Covariance model selection with a data-driven penalty"};
  app.require_subcommand(1);

  CommonFlags flags;
  auto* select = app.add_subcommand("select", "select a model for observed data");
  add_common(select, flags);
  select->add_option("--input", flags.overrides.input, "sample CSV (header row = grid)");

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo experiment against a known kernel");
  add_common(simulate, flags);

  auto* validate = app.add_subcommand("validate", "brute-force oracle equivalence checks");
  add_common(validate, flags);
  validate->add_flag("--inject-fault", flags.overrides.inject_fault,
                     "corrupt the Gaussian closed form (tests that checks can fail)")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : covsel::cli::kInputError;
  }

  covsel::cli::RunConfig cfg;
  try {
    if (!flags.config.empty()) cfg = covsel::cli::load_config(flags.config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return covsel::cli::kInputError;
  }
  covsel::cli::apply(cfg, flags.overrides);

  if (select->parsed()) return covsel::cli::cmd_select(cfg, std::cout, std::cerr);
  if (simulate->parsed()) return covsel::cli::cmd_simulate(cfg, std::cout, std::cerr);
  return covsel::cli::cmd_validate(cfg, std::cout, std::cerr);
}
