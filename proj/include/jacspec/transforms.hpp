#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jacspec/hk_solver.hpp"
#include "jacspec/spectral_measure.hpp"

namespace jacspec {

/// Stieltjes transform of the linear L-layer limit: the root of
/// z^L (-f)^{L+1} + z f + 1 = 0 with Im f Im z > 0 and f ~ -1/z.
///
/// The root is tracked from far away (along the ray for negative z,
/// vertically down for complex z). Throws NumericalError when two admissible
/// roots lie within 1e-6 of each other.
cplx linear_case_baseline(int L, ComplexGridPoint z);

/// Density of the linear L-layer limit at lambda > 0.
double linear_case_density(int L, double lambda);

/// Upper edge of the linear L-layer limit, L (1 + 1/L)^{L+1}.
double linear_case_edge(int L);

/// Moment generating function m(z) = -1 - z^{-1} f(z^{-1}) for z < 0.
using MomentFunction = std::function<double(double)>;

/// m(z) = \int z lambda / (1 - z lambda) nu(d lambda), z < 0.
/// Throws DomainError for z >= 0.
double moment_generating(const SpectralMeasure& nu, double z);

MomentFunction moment_function(const SpectralMeasure& nu);

/// m of nu_K diamond nu_R straight from the (h, k) system: m(1/z) = -h(z) k(z) / c.
MomentFunction diamond_moment_function(SpectralMeasure nu_K, SpectralMeasure nu_R,
                                       HkOptions options = {});

/// z(m): the negative z with m(z) = m, by bisection in log |z| to relative
/// tolerance 1e-12. Empty when m is outside the sampled range of m.
std::optional<double> inverse_moment(const MomentFunction& m, double target);

struct TransformTable {
  std::vector<std::pair<double, double>> m_samples;        ///< (z, m(z))
  std::vector<std::pair<double, double>> inverse_samples;  ///< (m, z(m))
  std::vector<std::pair<double, double>> sigma_samples;    ///< (m, z(m) / m)

  /// Samples m at `z_points` (negative) and inverts at `m_points`; points
  /// outside the range are left out.
  static TransformTable build(const MomentFunction& m, const std::vector<double>& z_points,
                              const std::vector<double>& m_points);
  /// m strictly increasing over the sampled z.
  bool monotone() const;
};

struct TransformCheck {
  double max_deviation = 0.0;
  std::vector<double> used;
  std::vector<std::string> warnings;
};

/// max |sigma_M(m) - sigma_K(m) sigma_R(m)| over `m_points`, sigma(m) = z(m) / m.
/// m-points outside any of the three ranges are skipped with a warning.
TransformCheck s_transform_check(const MomentFunction& nu_K, const MomentFunction& nu_R,
                                 const MomentFunction& nu_M, const std::vector<double>& m_points);
TransformCheck s_transform_check(const SpectralMeasure& nu_K, const SpectralMeasure& nu_R,
                                 const SpectralMeasure& nu_M, const std::vector<double>& m_points);

struct PenningtonCheck {
  double max_residual = 0.0;
  std::vector<double> used;
  std::vector<std::string> warnings;
};

/// max |m_K(w) - m| over negative `z_points`, with m = m_{M^L}(z) and
/// w = z_K(m) = -(|z m^{L-1}| (1 + m))^{1/L}, the negative real root.
/// Points with m outside (-1, 0) are skipped.
PenningtonCheck pennington_residual(const MomentFunction& nu_M_L, const MomentFunction& nu_K,
                                    int L, const std::vector<double>& z_points);
PenningtonCheck pennington_residual(const SpectralMeasure& nu_M_L, const SpectralMeasure& nu_K,
                                    int L, const std::vector<double>& z_points);

}  // namespace jacspec
