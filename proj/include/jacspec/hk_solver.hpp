#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jacspec/spectral_measure.hpp"

namespace jacspec {

struct HkOptions {
  /// Relative residual (|dh| + |dk|) / max(1, |h| + |k|).
  double tol = 1e-12;
  int max_iter = 2000;
  /// Width ratio c = m / n of the rectangular case; k enters the h and f
  /// equations as k / c.
  double c = 1.0;
};

struct HkPoint {
  cplx z;
  cplx h;
  cplx k;
  cplx f;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Why the point failed, empty when converged.
  std::string failure;
};

/// Solves
///   h = \int lambda nu_R(d lambda) / ((k / c) lambda - z),
///   k = \int tau nu_K(d tau) / (h tau + 1),
///   f = \int nu_R(d lambda) / ((k / c) lambda - z) = (-1 + h k / c) / z
/// for (h, k) in the class Im h Im z > 0, Im k Im z < 0 (0 < k <= sqrt(kappa_2)
/// on the negative axis).
///
/// The iteration runs on h alone (k = K(h)): damped Picard steps (alpha from
/// 0.5, halved on oscillation, floor 0.05) with Newton steps taken whenever
/// they stay in the class and reduce the residual. `start` is a warm start
/// (h, k); without it h0 = m_1(nu_R) / (k0 / c - z), k0 = m_1(nu_K).
/// Non-convergence and sign violations are reported in the returned point,
/// never thrown.
HkPoint solve_hk(const SpectralMeasure& nu_R, const SpectralMeasure& nu_K, ComplexGridPoint z,
                 const HkOptions& options = {},
                 std::optional<std::pair<cplx, cplx>> start = std::nullopt);

struct HkSolution {
  /// lambda and eps per point (z = lambda + i eps); zero probes have lambda = 0.
  std::vector<double> lambda;
  std::vector<double> eps;
  std::vector<HkPoint> points;

  std::size_t failed() const;
  /// `lambda,eps,re_h,im_h,re_k,im_k,re_f,im_f,residual,iterations`.
  void write_csv(std::ostream& out) const;
};

struct DiamondOptions {
  HkOptions solver;
  /// Explicit lambda grid; built from the inputs when empty.
  std::vector<double> lambda_grid;
  int grid_points = 1200;
  std::vector<double> eps_ladder = default_eps_ladder();
  /// Fraction of failed grid points tolerated before the operation fails.
  double max_failed_fraction = 0.02;
};

/// Support structure seen by a coarse pre-pass.
struct SupportSketch {
  /// Points where the density crosses 1 % of its peak, ascending.
  std::vector<double> edges;
  /// Local spacing of the pre-pass per edge; edges are known to about this accuracy.
  std::vector<double> spacing;
  /// Density does not vanish toward 0 (power singularity rather than a gap).
  bool singular_at_zero = true;

  double upper_edge() const { return edges.empty() ? 0.0 : edges.back(); }
};

struct DiamondResult {
  SpectralMeasure measure;
  HkSolution solution;
  std::vector<double> flagged;
  SupportSketch sketch;
};

/// Upper bound on the support of nu_K diamond nu_R: max K * max R * (1 + c^{-1/2})^2.
double diamond_support_bound(const SpectralMeasure& nu_K, const SpectralMeasure& nu_R,
                             double c = 1.0);

/// Lambda grid for the inversion: geometric toward 0 when the density is
/// singular there, uniform in the bulk, clustered around every edge, sparse
/// beyond the upper edge up to `bound`.
std::vector<double> diamond_lambda_grid(const SupportSketch& sketch, double bound, int points);

/// nu_K diamond nu_R through the (h, k) system and Stieltjes inversion.
///
/// Points are solved in decreasing lambda, coarse to fine eps, each warm
/// started from its neighbor; failed points are retried from the default
/// start and by continuation down from large Im z. For c != 1 the result is
/// the n-dimensional law c nu + (1 - c) delta_0, nu being the law that the
/// system describes. Throws NumericalError when more than
/// `max_failed_fraction` of the points fail.
DiamondResult diamond(const SpectralMeasure& nu_K, const SpectralMeasure& nu_R,
                      const DiamondOptions& options = {});

struct LayerCompositionPlan {
  /// nu_{K^1} .. nu_{K^L}.
  std::vector<SpectralMeasure> nu_K;
  /// c_l = n_{l-1} / n_l per layer; empty means all ones.
  std::vector<double> width_ratio;

  int depth() const { return static_cast<int>(nu_K.size()); }
  void validate() const;
};

/// nu_{M^1} = nu_{K^1} diamond delta_1, nu_{M^{l+1}} = nu_{K^{l+1}} diamond nu_{M^l}.
std::vector<DiamondResult> compose_layers(const LayerCompositionPlan& plan,
                                          const DiamondOptions& options = {});

}  // namespace jacspec
