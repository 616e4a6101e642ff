#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace jacspec {

using cplx = std::complex<double>;

struct Atom {
  double loc = 0.0;
  double mass = 0.0;
};

/// Point of the complex plane off the closed positive semi-axis.
class ComplexGridPoint {
public:
  /// Throws DomainError when z lies on [0, +inf).
  explicit ComplexGridPoint(cplx z);
  ComplexGridPoint(double re, double im) : ComplexGridPoint(cplx(re, im)) {}

  cplx value() const { return z_; }
  operator cplx() const { return z_; }

private:
  cplx z_;
};

/// True when z is off the closed positive semi-axis.
bool off_positive_axis(cplx z);

/// Probability measure on [0, inf): finitely many atoms plus an absolutely
/// continuous part given by nodal density values, interpreted as linear
/// between consecutive grid nodes and zero outside [grid.front(), grid.back()].
class SpectralMeasure {
public:
  static constexpr double kMassTolerance = 1e-3;

  /// Validates all invariants; throws ConfigError on violation.
  SpectralMeasure(std::vector<Atom> atoms, std::vector<double> grid,
                  std::vector<double> density);

  static SpectralMeasure point_mass(double loc);
  /// Atoms only; masses must sum to one within tolerance.
  static SpectralMeasure discrete(std::vector<Atom> atoms);
  /// Continuous measure sampling `density` on `grid` (no renormalization).
  static SpectralMeasure from_density(const std::function<double(double)>& density,
                                      std::vector<double> grid);
  /// Marchenko-Pastur law with ratio one, (2 pi)^-1 sqrt((4 - x) / x) on [0, 4].
  /// Grid is graded geometrically toward 0 and quadratically toward 4.
  static SpectralMeasure marchenko_pastur(int points = 32000);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& density() const { return density_; }

  double atom_mass() const;
  double continuous_mass() const;
  double total_mass() const { return atom_mass() + continuous_mass(); }
  /// Mass of the atom located exactly at `loc` (0 when absent).
  double atom_mass_at(double loc) const;

  /// Upper end of the support: the largest atom or grid node with positive weight.
  double support_max() const;
  /// Largest x where density exceeds `threshold` (or largest atom), whichever is larger.
  double support_edge(double threshold = 1e-3) const;

  /// nu([0, x]), exact for the piecewise-linear density.
  double cdf(double x) const;
  /// nu([0, x)).
  double cdf_left(double x) const;

  /// k-th moment, exact for the piecewise-linear density.
  double moment(int k) const;

  /// \int lambda^p nu(d lambda) / (a lambda + b)^q for p in {0,1,2}, q in {1,2}.
  ///
  /// Segments far from the pole use 10-point Gauss-Legendre; segments near the
  /// pole use the closed-form antiderivative. Throws DomainError when the
  /// pole falls on an atom or on a segment with positive density.
  cplx resolvent_moment(int p, int q, cplx a, cplx b) const;

  nlohmann::json to_json() const;
  static SpectralMeasure from_json(const nlohmann::json& j);
  /// `lambda,density` rows preceded by one `# atom,<loc>,<mass>` line per atom.
  void write_csv(std::ostream& out) const;
  static SpectralMeasure read_csv(std::istream& in);

private:
  SpectralMeasure() = default;
  void validate() const;

  std::vector<Atom> atoms_;
  std::vector<double> grid_;
  std::vector<double> density_;
};

/// \int g(lambda) nu(d lambda): atoms exactly, density by the trapezoid rule.
/// Throws EvaluationError naming the offending lambda when g is not finite
/// on the support.
cplx integrate(const SpectralMeasure& mu, const std::function<cplx(double)>& g);

/// Stieltjes transform \int nu(d lambda) / (lambda - z).
cplx stieltjes(const SpectralMeasure& mu, ComplexGridPoint z);

/// Samples of a Stieltjes transform on z = lambda + i eps, one eps ladder
/// (decreasing) per lambda node, plus probes at z = i eps for the atom at 0.
struct StieltjesSamples {
  std::vector<double> lambda;
  std::vector<std::vector<double>> eps;
  std::vector<std::vector<cplx>> f;
  std::vector<double> zero_eps;
  std::vector<cplx> zero_f;
};

/// Build the standard eps ladder for a grid: eps_k * min(1, lambda) per node
/// (so the ladder stays well below the local scale near 0), and the same
/// relative ladder times lambda.front() for the zero probes.
StieltjesSamples make_sample_layout(const std::vector<double>& lambda,
                                    const std::vector<double>& eps_ladder);

/// Default ladder {1e-2, 5e-3, 2.5e-3}.
std::vector<double> default_eps_ladder();

struct InversionResult {
  SpectralMeasure measure;
  /// Grid nodes where the finest ladder level and the extrapolation disagree
  /// by more than 10 %.
  std::vector<double> flagged;
  /// Total mass before clamping and renormalization.
  double raw_mass = 0.0;
};

struct InversionOptions {
  double atom_threshold = 1e-3;
  double disagreement = 0.1;
  double max_mass_drift = 1e-2;
};

/// Recover a measure from boundary values of its Stieltjes transform.
///
/// Density is the Richardson extrapolation of Im f / pi over the two finest
/// ladder levels, clamped at zero. An atom at 0 is recorded when
/// eps Im f(i eps) exceeds the threshold at the smallest probe and agrees
/// with the next probe to within `disagreement`; atoms
/// elsewhere are detected where the sample pair fits an isolated pole. Atom
/// contributions are subtracted before extracting the density. The result is
/// renormalized when the mass drift is below `max_mass_drift`, otherwise a
/// NumericalError is thrown.
InversionResult invert_stieltjes(const StieltjesSamples& samples,
                                 const InversionOptions& options = {});

}  // namespace jacspec
