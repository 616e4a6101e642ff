#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jacspec/quadrature.hpp"
#include "jacspec/spectral_measure.hpp"

namespace jacspec {

enum class ActivationKind { linear, hard_tanh, tanh, sin, sinh };

/// Scalar activation phi with its derivative and sup bounds.
///
/// `sinh` is unbounded and only available for simulation (experimental).
class Activation {
public:
  explicit Activation(ActivationKind kind) : kind_(kind) {}
  /// Parses "linear", "hard_tanh", "tanh", "sin", "sinh".
  static Activation parse(const std::string& name);

  ActivationKind kind() const { return kind_; }
  std::string name() const;
  bool experimental() const { return kind_ == ActivationKind::sinh; }

  double value(double x) const;
  /// HardTanh: 1 on (-1, 1), 0 elsewhere including the kinks +-1.
  double derivative(double x) const;

  /// sup |phi| (Phi_0), absent when unbounded.
  std::optional<double> sup_value() const;
  /// sup |phi'| (Phi_1), absent when unbounded.
  std::optional<double> sup_derivative() const;
  /// Points where phi is not smooth.
  std::vector<double> kinks() const;

private:
  ActivationKind kind_;
};

/// Law F of the bias components: zero, N(0, sigma2) or a finite discrete law.
class BiasLaw {
public:
  enum class Kind { zero, gaussian, discrete };

  static BiasLaw zero();
  static BiasLaw gaussian(double sigma2);
  /// Requires masses summing to one and mean zero.
  static BiasLaw discrete(std::vector<double> points, std::vector<double> masses);

  Kind kind() const { return kind_; }
  double variance() const;
  const std::vector<double>& points() const { return points_; }
  const std::vector<double>& masses() const { return masses_; }

  /// Quadrature nodes for integrals against F: exact for discrete laws,
  /// `gaussian_nodes`-point Gauss-Hermite for the Gaussian law.
  quad::Rule nodes(int gaussian_nodes = 100) const;

private:
  Kind kind_ = Kind::zero;
  double sigma2_ = 0.0;
  std::vector<double> points_;
  std::vector<double> masses_;
};

/// Node counts of the gamma rule. Smooth integrands use Gauss-Hermite;
/// kinked integrands use piecewise Gauss-Legendre with the same count per piece.
inline constexpr int kGammaNodes = 200;
inline constexpr int kBiasNodes = 100;
inline constexpr double kQuadratureTolerance = 1e-9;

/// \int\int chi(gamma sqrt(q - sigma_b^2) + b) Gamma(d gamma) F(db).
///
/// `kinks` lists points where chi is not smooth. When doubling the gamma node
/// count moves the result by more than 1e-9 the integral is redone on unit
/// Gauss-Legendre panels; NumericalError if that also fails the doubling test.
double activation_statistic(const std::function<double(double)>& chi, double q,
                            const BiasLaw& bias, std::span<const double> kinks = {});

/// One step of the second-moment recurrence:
/// \int\int phi^2(gamma sqrt(q_prev - sigma_b^2) + b) Gamma(d gamma) F(db) + sigma_b^2.
double q_step(double q_prev, const Activation& phi, const BiasLaw& bias);

/// q^1..q^L starting from q1 > sigma_b^2.
std::vector<double> q_sequence(double q1, const Activation& phi, const BiasLaw& bias, int depth);

struct FixedPointOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
  double damping = 0.5;
};

/// q* with |q_step(q*) - q*| < tolerance for a bounded activation.
///
/// Damped iteration with Aitken acceleration from the top of the invariant
/// interval [sigma_b^2, Phi_0^2 + sigma_b^2]. The converged point is then
/// checked for a sign change of q_step(q) - q; when the map only creeps
/// toward sigma_b^2 the fixed point is located by bracketing instead. When
/// q_step(q) < q on all of (sigma_b^2, Phi_0^2 + sigma_b^2] (HardTanh or tanh
/// with sigma_b^2 = 0) the only fixed point is sigma_b^2 itself.
/// Throws ConfigError for linear or unbounded activations and NumericalError
/// (carrying the trajectory) when nothing converges.
double find_q_fixed_point(const Activation& phi, const BiasLaw& bias,
                          const FixedPointOptions& options = {});

/// Law of (phi'(xi))^2 with xi = sqrt(q - sigma_b^2) gamma + b.
///
/// Linear gives delta_1; HardTanh gives atoms at 1 and 0; smooth bounded
/// activations give a continuous part on 2001 nodes over [0, Phi_1^2].
/// Throws ConfigError for activations without a registered derivative structure.
SpectralMeasure nu_K(double q, const Activation& phi, const BiasLaw& bias);

}  // namespace jacspec
