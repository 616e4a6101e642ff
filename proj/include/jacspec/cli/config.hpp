#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jacspec/ensemble.hpp"
#include "jacspec/hk_solver.hpp"

namespace jacspec::cli {

inline constexpr const char* kVersion = "0.1.0";

struct EnsembleSection {
  std::uint64_t samples = 10;
  int bins = 200;
  /// Unset means linear bins, except log bins for cauchy weights.
  std::optional<bool> log_binned;
  std::optional<double> lo;
  std::optional<double> hi;

  BinSpec bin_spec(const NetworkConfig& network) const;
};

struct SolverSection {
  int grid_points = 1200;
  double tol = 1e-12;
  int max_iter = 2000;
  std::vector<double> eps_ladder = default_eps_ladder();
  double max_failed_fraction = 0.02;
  /// q^1; unset means n_0^{-1} |x^0|^2 + sigma_b^2 of the input spec.
  std::optional<double> q1;

  DiamondOptions diamond_options() const;
};

struct Tolerances {
  double sup_cdf = 0.03;
  double edge_relative = 0.10;
  double first_moment_relative = 0.05;
  double second_moment_relative = 0.10;
};

struct CompareSection {
  std::string sim;
  std::string theory;
  Tolerances tolerances;
};

struct UniversalitySection {
  std::vector<EntryLaw> laws;
  double tolerance = 0.05;
};

struct RunConfig {
  NetworkConfig network;
  EnsembleSection ensemble;
  SolverSection solver;
  CompareSection compare;
  UniversalitySection universality;
  std::string out = "out";

  /// Fully resolved form, accepted back by parse_config.
  nlohmann::json to_json() const;
};

/// Builds a RunConfig from parsed JSON. Unknown keys, wrong types and invalid
/// values throw ConfigError naming the offending path (e.g. `network.depth`).
RunConfig parse_config(const nlohmann::json& j);

/// Reads and parses a config file; syntax errors report line and column.
RunConfig load_config(const std::string& path);

}  // namespace jacspec::cli
