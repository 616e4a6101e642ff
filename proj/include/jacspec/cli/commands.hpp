#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jacspec/cli/config.hpp"
#include "jacspec/ensemble.hpp"

namespace jacspec::cli {

/// Process exit codes.
enum ExitCode : int { kSuccess = 0, kToleranceFail = 1, kConfigError = 2, kNumericalFailure = 3 };

/// 64-bit FNV-1a of `bytes`, as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Whole file as bytes; throws ConfigError when it cannot be read.
std::string read_file(const std::string& path);

/// Histogram (`bin_left,bin_right,density`) or measure (`lambda,density`)
/// file, chosen by its header. Throws ConfigError when the file does not
/// parse or is not normalized.
Distribution read_distribution(const std::string& path);

struct ComparisonReport {
  std::string sim_path;
  std::string theory_path;
  std::string sim_digest;
  std::string theory_digest;
  double sup_cdf = 0.0;
  double first_moment_sim = 0.0;
  double first_moment_theory = 0.0;
  double second_moment_sim = 0.0;
  double second_moment_theory = 0.0;
  double edge_sim = 0.0;
  double edge_theory = 0.0;
  Tolerances tolerances;
  /// Names of the tolerances that were exceeded.
  std::vector<std::string> failures;

  bool pass() const { return failures.empty(); }
  double first_moment_delta() const;
  double second_moment_delta() const;
  double edge_delta() const;
  nlohmann::json to_json() const;
  /// Human-readable lines.
  std::string summary() const;
};

/// Compares two normalized distributions. Moment and edge deltas are
/// relative to the theory side.
ComparisonReport compare_distributions(const Distribution& sim, const Distribution& theory,
                                       const Tolerances& tolerances);

/// q^1 of the network input: n_0^{-1} |x^0|^2 + sigma_b^2 (1 + sigma_b^2 for
/// i.i.d. inputs, which are rescaled to mean square one).
double input_q1(const NetworkConfig& network);

/// Each command writes its artifacts under config.out, logs to `log`, and
/// returns an ExitCode. ConfigError and NumericalError propagate.
int cmd_simulate(const RunConfig& config, int threads, std::ostream& log);
int cmd_solve(const RunConfig& config, std::ostream& log);
int cmd_compare(const RunConfig& config, std::ostream& log);
int cmd_universality(const RunConfig& config, int threads, std::ostream& log);
int cmd_q_fixed_point(const RunConfig& config, std::ostream& log);

}  // namespace jacspec::cli
