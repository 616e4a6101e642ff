#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "jacspec/activation.hpp"
#include "jacspec/errors.hpp"
#include "jacspec/rng.hpp"
#include "jacspec/spectral_measure.hpp"

namespace jacspec {

/// Law of the i.i.d. weight entries X_{ij}; W = n^{-1/2} X.
///
/// `cauchy` draws W entries directly from the Cauchy law with scale 1/n_{l-1}
/// (no further n^{-1/2}) and biases from Cauchy(1/n_l). It has no finite
/// moments and is experimental.
enum class EntryLaw { gaussian, rademacher, uniform, cauchy };

EntryLaw parse_entry_law(const std::string& name);
std::string to_string(EntryLaw law);

/// Input vector: explicit values, or i.i.d. draws rescaled so n^{-1}|x|^2 = 1.
struct IidInput {
  EntryLaw law = EntryLaw::gaussian;
};
using InputSpec = std::variant<IidInput, std::vector<double>>;

struct NetworkConfig {
  int depth = 1;
  /// n_0, ..., n_L.
  std::vector<int> widths{1, 1};
  Activation activation{ActivationKind::linear};
  EntryLaw weight_law = EntryLaw::gaussian;
  BiasLaw bias = BiasLaw::zero();
  InputSpec input = IidInput{};
  std::uint64_t seed = 0;
  /// Required for cauchy weights and unbounded activations.
  bool experimental = false;

  static NetworkConfig square(int depth, int n, Activation activation);
  /// Throws ConfigError when an invariant is violated.
  void validate() const;
  double sigma_b2() const { return bias.variance(); }
  nlohmann::json to_json() const;
};

/// A sample that cannot be used (non-finite activations, SVD failure).
class SampleRejected : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// One realization of the network: weights, biases, and per-layer signals.
struct ForwardPass {
  std::vector<Eigen::MatrixXd> weights;  ///< W^1..W^L, already scaled
  std::vector<Eigen::VectorXd> biases;   ///< b^1..b^L
  std::vector<Eigen::VectorXd> x;        ///< x^0..x^L
  std::vector<Eigen::VectorXd> y;        ///< y^1..y^L
  std::vector<Eigen::VectorXd> d;        ///< diagonals of D^1..D^L
};

/// Draws the network from `stream` and propagates the input.
///
/// Draw order: the input entries (i.i.d. inputs only), then per layer the
/// entries of W column by column followed by the components of b.
/// Throws SampleRejected on non-finite activations.
ForwardPass forward_pass(const NetworkConfig& config, PhiloxStream& stream);

/// J = D^L W^L ... D^1 W^1.
Eigen::MatrixXd jacobian(const ForwardPass& pass);

/// Singular values of J, descending, padded with zeros to n_L entries.
/// Throws SampleRejected when the SVD does not converge or fails the trace check
/// sum s_i^2 = |J|_F^2.
std::vector<double> jacobian_singular_values(const NetworkConfig& config, PhiloxStream& stream);

/// Eigenvalues of M = J J^T (squared singular values), ascending, with
/// round-off negatives in [-1e-10 s_1^2, 0) clamped to zero.
std::vector<double> squared_singular_values(const std::vector<double>& singular);

struct BinSpec {
  int bins = 200;
  bool log_binned = false;
  /// Explicit range; default [0, 1.05 lambda_max] (linear) or
  /// [1e-4, lambda_max] (log).
  std::optional<double> lo;
  std::optional<double> hi;
};

struct EnsembleHistogram {
  std::vector<double> edges;
  std::vector<double> density;  ///< normalized: sum density * width = 1
  std::uint64_t samples = 0;
  double lambda_max_observed = 0.0;
  bool log_binned = false;
  /// Values outside the binned range (only possible with log bins or an explicit range).
  std::uint64_t out_of_range = 0;

  double cdf(double x) const;
  double moment(int k) const;
  /// Right edge of the last bin with positive density.
  double support_edge() const;

  void write_csv(std::ostream& out) const;
  static EnsembleHistogram read_csv(std::istream& in);
};

/// Bins `values` (all eigenvalues of all samples).
EnsembleHistogram make_histogram(const std::vector<double>& values, const BinSpec& spec,
                                 std::uint64_t samples);

struct EnsembleRun {
  EnsembleHistogram histogram;
  std::vector<double> eigenvalues;  ///< sample-major, ascending within a sample
  std::uint64_t accepted = 0;
  std::uint64_t rejected = 0;
  std::vector<std::string> diagnostics;
  double wall_seconds = 0.0;
};

/// Samples N networks with streams (seed, 0..N-1) over `threads` workers.
///
/// The histogram depends only on (config, N, bins): samples are independent
/// and eigenvalues are binned in sample order after all workers finish.
/// Throws NumericalError when more than 0.1 % of samples are rejected or all are.
EnsembleRun run_ensemble(const NetworkConfig& config, std::uint64_t samples, const BinSpec& bins,
                         int threads = 1);

/// Either side of a CDF comparison.
using Distribution = std::variant<EnsembleHistogram, SpectralMeasure>;

/// sup |F1 - F2| over the merged breakpoints.
///
/// A histogram counts values in [e_j, e_{j+1}), so its CDF is known exactly
/// only at its edges and only as the mass strictly below them. Histogram
/// edges are therefore compared using left limits, and measure breakpoints
/// (atoms, grid nodes) inside a histogram range are not used. Without a
/// histogram, atoms and nodes are compared on both sides.
double empirical_cdf_distance(const Distribution& a, const Distribution& b);

}  // namespace jacspec
