// Command-line front end: simulate | solve | compare | universality | q-fixed-point.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jacspec/cli/commands.hpp"
#include "jacspec/cli/config.hpp"
#include "jacspec/errors.hpp"

namespace {

struct Flags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string sim;
  std::string theory;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--out", f.out, "output directory (overrides config)");
  cmd->add_option("--seed", f.seed, "64-bit seed (overrides config)");
  cmd->add_option("--threads", f.threads, "worker threads")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace jacspec;
  using namespace jacspec::cli;

  CLI::App app{"Jacobian spectrum laboratory"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Flags flags;
  CLI::App* simulate = app.add_subcommand("simulate", "sample networks and histogram eigenvalues of J J^T");
  CLI::App* solve = app.add_subcommand("solve", "limiting density from the (h, k) system");
  CLI::App* compare = app.add_subcommand("compare", "compare a simulated and a theoretical density");
  CLI::App* universality = app.add_subcommand("universality", "pairwise distances across weight laws");
  CLI::App* qfp = app.add_subcommand("q-fixed-point", "fixed point of the q recurrence");
  for (CLI::App* c : {simulate, solve, compare, universality, qfp}) add_common(c, flags);
  compare->add_option("sim", flags.sim, "simulated histogram or density CSV");
  compare->add_option("theory", flags.theory, "theoretical density CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kSuccess : kConfigError;
  }

  try {
    RunConfig config = flags.config.empty() ? parse_config(nlohmann::json::object())
                                            : load_config(flags.config);
    if (!flags.out.empty()) config.out = flags.out;
    if (flags.seed) config.network.seed = *flags.seed;
    if (!flags.sim.empty()) config.compare.sim = flags.sim;
    if (!flags.theory.empty()) config.compare.theory = flags.theory;

    if (*simulate) return cmd_simulate(config, flags.threads, std::cout);
    if (*solve) return cmd_solve(config, std::cout);
    if (*compare) return cmd_compare(config, std::cout);
    if (*universality) return cmd_universality(config, flags.threads, std::cout);
    return cmd_q_fixed_point(config, std::cout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalFailure;
  }
}
