#include "jacspec/spectral_measure.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "jacspec/errors.hpp"
#include "jacspec/format.hpp"
#include "jacspec/quadrature.hpp"

namespace jacspec {
namespace {

// Polynomial lambda^p * (d0 + s (lambda - x0)) integrated against
// (a lambda + b)^-q over [x0, x1] with an n-point Gauss-Legendre rule.
cplx segment_gauss(int p, int q, cplx a, cplx b, double x0, double x1, double d0,
                   double s, int n) {
  const quad::Rule& rule = quad::gauss_legendre(n);
  const double half = 0.5 * (x1 - x0);
  const double mid = 0.5 * (x0 + x1);
  cplx sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = mid + half * rule.nodes[i];
    const double rho = d0 + s * (x - x0);
    const cplx den = a * x + b;
    cplx term = rho * std::pow(x, p) / den;
    if (q == 2) term /= den;
    sum += rule.weights[i] * term;
  }
  return half * sum;
}

// Closed-form antiderivative in t = lambda - w around the pole w = -b / a.
cplx segment_exact(int p, int q, cplx a, cplx w, double x0, double x1, double d0,
                   double s) {
  const cplx rho_w = d0 + s * (w - x0);
  std::array<cplx, 4> c{};
  int terms = 0;
  switch (p) {
    case 0:
      c = {rho_w, s, 0.0, 0.0};
      terms = 2;
      break;
    case 1:
      c = {w * rho_w, rho_w + w * s, s, 0.0};
      terms = 3;
      break;
    default:
      c = {w * w * rho_w, 2.0 * w * rho_w + w * w * s, rho_w + 2.0 * w * s, s};
      terms = 4;
      break;
  }
  const cplx t0 = x0 - w;
  const cplx t1 = x1 - w;
  cplx sum = 0.0;
  for (int j = 0; j < terms; ++j) {
    if (c[j] == 0.0) continue;
    const int e = j - q;
    cplx piece;
    if (e == -2) {
      piece = 1.0 / t0 - 1.0 / t1;
    } else if (e == -1) {
      piece = std::log(t1 / t0);
    } else {
      piece = (std::pow(t1, e + 1) - std::pow(t0, e + 1)) / static_cast<double>(e + 1);
    }
    sum += c[j] * piece;
  }
  return q == 1 ? sum / a : sum / (a * a);
}

double trapezoid_mass(const std::vector<double>& grid, const std::vector<double>& density) {
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    mass += 0.5 * (density[i] + density[i + 1]) * (grid[i + 1] - grid[i]);
  }
  return mass;
}

}  // namespace

bool off_positive_axis(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag()) &&
         (z.imag() != 0.0 || z.real() < 0.0);
}

ComplexGridPoint::ComplexGridPoint(cplx z) : z_(z) {
  if (!off_positive_axis(z)) {
    std::ostringstream msg;
    msg << "z = " << z << " lies on the closed positive semi-axis";
    throw DomainError(msg.str());
  }
}

SpectralMeasure::SpectralMeasure(std::vector<Atom> atoms, std::vector<double> grid,
                                 std::vector<double> density)
    : atoms_(std::move(atoms)), grid_(std::move(grid)), density_(std::move(density)) {
  std::sort(atoms_.begin(), atoms_.end(),
            [](const Atom& x, const Atom& y) { return x.loc < y.loc; });
  validate();
}

void SpectralMeasure::validate() const {
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    const Atom& a = atoms_[i];
    if (!std::isfinite(a.loc) || a.loc < 0.0) {
      throw ConfigError("atom location must be finite and nonnegative");
    }
    if (!(a.mass > 0.0) || a.mass > 1.0 + kMassTolerance) {
      throw ConfigError("atom mass must lie in (0, 1]");
    }
    if (i > 0 && atoms_[i - 1].loc == a.loc) {
      throw ConfigError("atom locations must be distinct");
    }
  }
  if (grid_.size() != density_.size()) {
    throw ConfigError("grid and density must have equal length");
  }
  if (grid_.size() == 1) throw ConfigError("a density grid needs at least two nodes");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(grid_[i]) || grid_[i] < 0.0) {
      throw ConfigError("grid nodes must be finite and nonnegative");
    }
    if (i > 0 && !(grid_[i] > grid_[i - 1])) {
      throw ConfigError("grid must be strictly increasing");
    }
    if (!std::isfinite(density_[i]) || density_[i] < 0.0) {
      throw ConfigError("density values must be finite and nonnegative");
    }
  }
  for (const Atom& a : atoms_) {
    auto it = std::lower_bound(grid_.begin(), grid_.end(), a.loc);
    if (it != grid_.end() && *it == a.loc && density_[it - grid_.begin()] > 0.0) {
      throw ConfigError("atom coincides with a grid node carrying density");
    }
  }
  const double mass = total_mass();
  if (std::abs(mass - 1.0) > kMassTolerance) {
    std::ostringstream msg;
    msg << "total mass " << mass << " outside [1 - 1e-3, 1 + 1e-3]";
    throw ConfigError(msg.str());
  }
}

SpectralMeasure SpectralMeasure::point_mass(double loc) {
  return SpectralMeasure({{loc, 1.0}}, {}, {});
}

SpectralMeasure SpectralMeasure::discrete(std::vector<Atom> atoms) {
  return SpectralMeasure(std::move(atoms), {}, {});
}

SpectralMeasure SpectralMeasure::from_density(const std::function<double(double)>& density,
                                              std::vector<double> grid) {
  std::vector<double> values(grid.size());
  std::transform(grid.begin(), grid.end(), values.begin(), density);
  return SpectralMeasure({}, std::move(grid), std::move(values));
}

SpectralMeasure SpectralMeasure::marchenko_pastur(int points) {
  // Geometric grading toward the 1/sqrt(x) singularity and quadratic grading
  // in 4 - x toward the square-root edge.
  if (points < 16) throw ConfigError("marchenko_pastur needs at least 16 points");
  constexpr double kLow = 1e-14;
  constexpr double kSplit = 0.04;
  const int n_low = points / 2;
  const int n_high = points - n_low - 1;
  std::vector<double> grid;
  grid.reserve(points);
  grid.push_back(0.0);
  for (int i = 0; i < n_low; ++i) {
    grid.push_back(kLow * std::pow(kSplit / kLow, static_cast<double>(i) / n_low));
  }
  for (int i = 0; i < n_high; ++i) {
    const double u = static_cast<double>(i) / (n_high - 1);
    grid.push_back(kSplit + (4.0 - kSplit) * std::sin(0.5 * std::numbers::pi * u));
  }
  grid.back() = 4.0;
  std::vector<double> density(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid[i];
    density[i] = (x <= 0.0 || x >= 4.0) ? 0.0 : std::sqrt((4.0 - x) / x) / (2.0 * std::numbers::pi);
  }
  // The 1/sqrt(x) peak is not representable at x = 0; assign the first
  // segment the density that reproduces its exact mass.
  const double x1 = grid[1];
  const double exact_first = [&] {
    // \int_0^x1 (2pi)^-1 sqrt((4-x)/x) dx via substitution x = u^2.
    const quad::Rule& rule = quad::gauss_legendre(20);
    const double r = std::sqrt(x1);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double u = 0.5 * r * (rule.nodes[i] + 1.0);
      sum += rule.weights[i] * 2.0 * std::sqrt(4.0 - u * u);
    }
    return 0.5 * r * sum / (2.0 * std::numbers::pi);
  }();
  density[0] = std::max(0.0, 2.0 * exact_first / x1 - density[1]);
  SpectralMeasure mp;
  mp.grid_ = std::move(grid);
  mp.density_ = std::move(density);
  const double mass = mp.continuous_mass();
  for (double& d : mp.density_) d /= mass;
  mp.validate();
  return mp;
}

double SpectralMeasure::atom_mass() const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.mass;
  return m;
}

double SpectralMeasure::continuous_mass() const { return trapezoid_mass(grid_, density_); }

double SpectralMeasure::atom_mass_at(double loc) const {
  for (const Atom& a : atoms_) {
    if (a.loc == loc) return a.mass;
  }
  return 0.0;
}

double SpectralMeasure::support_max() const {
  double top = atoms_.empty() ? 0.0 : atoms_.back().loc;
  for (std::size_t i = grid_.size(); i-- > 0;) {
    const bool has_weight = density_[i] > 0.0 || (i > 0 && density_[i - 1] > 0.0);
    if (has_weight) {
      top = std::max(top, grid_[i]);
      break;
    }
  }
  return top;
}

double SpectralMeasure::support_edge(double threshold) const {
  double top = atoms_.empty() ? 0.0 : atoms_.back().loc;
  for (std::size_t i = grid_.size(); i-- > 0;) {
    if (density_[i] > threshold) {
      double edge = grid_[i];
      if (i + 1 < grid_.size()) {
        // Linear crossing of the threshold inside the next segment.
        const double d0 = density_[i];
        const double d1 = density_[i + 1];
        edge += (grid_[i + 1] - grid_[i]) * (d0 - threshold) / (d0 - d1);
      }
      top = std::max(top, edge);
      break;
    }
  }
  return top;
}

double SpectralMeasure::cdf(double x) const {
  double c = 0.0;
  for (const Atom& a : atoms_) {
    if (a.loc <= x) c += a.mass;
  }
  for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
    const double x0 = grid_[i];
    const double x1 = grid_[i + 1];
    if (x <= x0) break;
    if (x >= x1) {
      c += 0.5 * (density_[i] + density_[i + 1]) * (x1 - x0);
    } else {
      const double dx = density_[i] + (density_[i + 1] - density_[i]) * (x - x0) / (x1 - x0);
      c += 0.5 * (density_[i] + dx) * (x - x0);
      break;
    }
  }
  return c;
}

double SpectralMeasure::cdf_left(double x) const {
  double c = cdf(x);
  for (const Atom& a : atoms_) {
    if (a.loc == x) c -= a.mass;
  }
  return c;
}

double SpectralMeasure::moment(int k) const {
  double m = 0.0;
  for (const Atom& a : atoms_) m += a.mass * std::pow(a.loc, k);
  const quad::Rule& rule = quad::gauss_legendre(std::max(2, k / 2 + 2));
  for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
    const double x0 = grid_[i];
    const double x1 = grid_[i + 1];
    const double half = 0.5 * (x1 - x0);
    const double mid = 0.5 * (x0 + x1);
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double x = mid + half * rule.nodes[j];
      const double rho = density_[i] + (density_[i + 1] - density_[i]) * (x - x0) / (x1 - x0);
      m += half * rule.weights[j] * rho * std::pow(x, k);
    }
  }
  return m;
}

cplx SpectralMeasure::resolvent_moment(int p, int q, cplx a, cplx b) const {
  if (p < 0 || p > 2 || q < 1 || q > 2) {
    throw DomainError("resolvent_moment supports p in {0,1,2}, q in {1,2}");
  }
  cplx sum = 0.0;
  for (const Atom& atom : atoms_) {
    const cplx den = a * atom.loc + b;
    if (den == 0.0) throw DomainError("resolvent pole coincides with an atom");
    cplx term = atom.mass * std::pow(atom.loc, p) / den;
    if (q == 2) term /= den;
    sum += term;
  }
  if (grid_.empty()) return sum;

  const bool constant_denominator = (a == 0.0);
  const cplx w = constant_denominator ? cplx(0.0) : -b / a;
  for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
    const double d0 = density_[i];
    const double d1 = density_[i + 1];
    if (d0 == 0.0 && d1 == 0.0) continue;
    const double x0 = grid_[i];
    const double x1 = grid_[i + 1];
    const double len = x1 - x0;
    const double s = (d1 - d0) / len;
    if (constant_denominator) {
      sum += segment_gauss(p, q, a, b, x0, x1, d0, s, 4);
      continue;
    }
    const double dist = std::abs(w - 0.5 * (x0 + x1));
    if (dist > 100.0 * len) {
      sum += segment_gauss(p, q, a, b, x0, x1, d0, s, 4);
    } else if (dist > 10.0 * len) {
      sum += segment_gauss(p, q, a, b, x0, x1, d0, s, 6);
    } else if (dist > 2.0 * len) {
      sum += segment_gauss(p, q, a, b, x0, x1, d0, s, 12);
    } else {
      if (w.imag() == 0.0 && w.real() >= x0 && w.real() <= x1) {
        throw DomainError("resolvent pole lies on the support of the density");
      }
      sum += segment_exact(p, q, a, w, x0, x1, d0, s);
    }
  }
  return sum;
}

nlohmann::json SpectralMeasure::to_json() const {
  nlohmann::json atoms = nlohmann::json::array();
  for (const Atom& a : atoms_) atoms.push_back({{"loc", a.loc}, {"mass", a.mass}});
  return {{"atoms", atoms}, {"grid", grid_}, {"density", density_}};
}

SpectralMeasure SpectralMeasure::from_json(const nlohmann::json& j) {
  std::vector<Atom> atoms;
  for (const auto& a : j.at("atoms")) {
    atoms.push_back({a.at("loc").get<double>(), a.at("mass").get<double>()});
  }
  return SpectralMeasure(std::move(atoms), j.at("grid").get<std::vector<double>>(),
                         j.at("density").get<std::vector<double>>());
}

void SpectralMeasure::write_csv(std::ostream& out) const {
  for (const Atom& a : atoms_) {
    out << "# atom," << fmt_g17(a.loc) << ',' << fmt_g17(a.mass) << '\n';
  }
  out << "lambda,density\n";
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    out << fmt_g17(grid_[i]) << ',' << fmt_g17(density_[i]) << '\n';
  }
}

SpectralMeasure SpectralMeasure::read_csv(std::istream& in) {
  std::vector<Atom> atoms;
  std::vector<double> grid;
  std::vector<double> density;
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.rfind("# atom,", 0) == 0) {
      Atom a;
      if (std::sscanf(line.c_str() + 7, "%lf,%lf", &a.loc, &a.mass) != 2) {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed atom line");
      }
      atoms.push_back(a);
      continue;
    }
    if (line[0] == '#') continue;
    if (!header) {
      if (line != "lambda,density") {
        throw ConfigError("line " + std::to_string(lineno) + ": expected header lambda,density");
      }
      header = true;
      continue;
    }
    double x = 0.0;
    double d = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf", &x, &d) != 2) {
      throw ConfigError("line " + std::to_string(lineno) + ": malformed density row");
    }
    grid.push_back(x);
    density.push_back(d);
  }
  if (!header) throw ConfigError("missing lambda,density header");
  return SpectralMeasure(std::move(atoms), std::move(grid), std::move(density));
}

cplx integrate(const SpectralMeasure& mu, const std::function<cplx(double)>& g) {
  auto checked = [&](double x) {
    const cplx v = g(x);
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      std::ostringstream msg;
      msg << "integrand is not finite at lambda = " << fmt_g17(x);
      throw EvaluationError(msg.str());
    }
    return v;
  };
  cplx sum = 0.0;
  for (const Atom& a : mu.atoms()) sum += a.mass * checked(a.loc);
  const auto& grid = mu.grid();
  const auto& density = mu.density();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (density[i] == 0.0) continue;
    const double left = i > 0 ? grid[i] - grid[i - 1] : 0.0;
    const double right = i + 1 < grid.size() ? grid[i + 1] - grid[i] : 0.0;
    sum += 0.5 * (left + right) * density[i] * checked(grid[i]);
  }
  return sum;
}

cplx stieltjes(const SpectralMeasure& mu, ComplexGridPoint z) {
  return mu.resolvent_moment(0, 1, 1.0, -z.value());
}

std::vector<double> default_eps_ladder() { return {1e-2, 5e-3, 2.5e-3}; }

StieltjesSamples make_sample_layout(const std::vector<double>& lambda,
                                    const std::vector<double>& eps_ladder) {
  if (eps_ladder.size() < 2) throw DomainError("eps ladder needs at least two levels");
  StieltjesSamples s;
  s.lambda = lambda;
  s.eps.reserve(lambda.size());
  for (double x : lambda) {
    const double scale = std::min(1.0, x);
    std::vector<double> row;
    for (double e : eps_ladder) row.push_back(e * scale);
    s.eps.push_back(std::move(row));
  }
  const double zero_scale = lambda.empty() ? 1.0 : std::min(1.0, lambda.front());
  for (double e : eps_ladder) s.zero_eps.push_back(e * (zero_scale > 0.0 ? zero_scale : 1e-12));
  s.f.assign(lambda.size(), std::vector<cplx>(eps_ladder.size()));
  s.zero_f.assign(eps_ladder.size(), cplx(0.0));
  return s;
}

InversionResult invert_stieltjes(const StieltjesSamples& samples,
                                 const InversionOptions& options) {
  const std::size_t n = samples.lambda.size();
  if (samples.eps.size() != n || samples.f.size() != n) {
    throw DomainError("Stieltjes samples: inconsistent sizes");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (samples.eps[i].size() < 2 || samples.f[i].size() != samples.eps[i].size()) {
      throw DomainError("each lambda node needs a ladder of at least two eps levels");
    }
    if (i > 0 && !(samples.lambda[i] > samples.lambda[i - 1])) {
      throw DomainError("lambda grid must be strictly increasing");
    }
  }

  auto extrapolate = [](double ea, double va, double eb, double vb) {
    return (ea * vb - eb * va) / (ea - eb);
  };

  std::vector<Atom> atoms;
  std::vector<std::vector<cplx>> f = samples.f;

  // Atom at 0 from the probes on the imaginary axis.
  const std::size_t nz = samples.zero_eps.size();
  if (nz >= 2 && samples.zero_f.size() == nz) {
    const double ea = samples.zero_eps[nz - 2];
    const double eb = samples.zero_eps[nz - 1];
    const double va = ea * samples.zero_f[nz - 2].imag();
    const double vb = eb * samples.zero_f[nz - 1].imag();
    // A genuine atom makes eps Im f(i eps) flat in eps; a power singularity
    // lambda^{-a} makes it scale like eps^{1-a}.
    if (vb > options.atom_threshold && std::abs(va - vb) <= options.disagreement * vb) {
      double m0 = extrapolate(ea, va, eb, vb);
      if (!(m0 > options.atom_threshold)) m0 = vb;
      m0 = std::min(m0, 1.0);
      atoms.push_back({0.0, m0});
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < f[i].size(); ++k) {
          const cplx z(samples.lambda[i], samples.eps[i][k]);
          f[i][k] += m0 / z;
        }
      }
    }
  }

  // Isolated poles away from 0: 1/f = (c - z) / m fitted on the finest level,
  // confirmed on the next coarser one.
  struct Candidate {
    Atom atom;
    double strength;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t kb = f[i].size() - 1;
    const double eb = samples.eps[i][kb];
    const double ea = samples.eps[i][kb - 1];
    const cplx fb = f[i][kb];
    if (!(eb * fb.imag() > options.atom_threshold)) continue;
    const cplx inv = 1.0 / fb;
    const double m = -eb / inv.imag();
    const double c = samples.lambda[i] + m * inv.real();
    const double spacing = std::max(i > 0 ? samples.lambda[i] - samples.lambda[i - 1] : 0.0,
                                    i + 1 < n ? samples.lambda[i + 1] - samples.lambda[i] : 0.0);
    if (!(m > options.atom_threshold) || m > 1.0 + SpectralMeasure::kMassTolerance) continue;
    if (c <= 0.0 || std::abs(c - samples.lambda[i]) > std::max(ea, spacing)) continue;
    const cplx predicted = m / (c - cplx(samples.lambda[i], ea));
    const cplx actual = f[i][kb - 1];
    if (std::abs(predicted - actual) > 0.1 * std::abs(actual)) continue;
    if (!atoms.empty() && atoms.front().loc == 0.0 && c < ea) continue;
    candidates.push_back({{c, std::min(m, 1.0)}, eb * fb.imag()});
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& x, const Candidate& y) { return x.atom.loc < y.atom.loc; });
  for (std::size_t i = 0; i < candidates.size();) {
    std::size_t best = i;
    std::size_t j = i + 1;
    const double merge = std::max(1e-2 * candidates[i].atom.loc, 1e-9);
    while (j < candidates.size() && candidates[j].atom.loc - candidates[i].atom.loc < merge) {
      if (candidates[j].strength > candidates[best].strength) best = j;
      ++j;
    }
    atoms.push_back(candidates[best].atom);
    const Atom a = candidates[best].atom;
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < f[r].size(); ++k) {
        f[r][k] -= a.mass / (a.loc - cplx(samples.lambda[r], samples.eps[r][k]));
      }
    }
    i = j;
  }

  // Density by two-level Richardson extrapolation of Im f / pi.
  std::vector<double> density(n, 0.0);
  std::vector<double> finest(n, 0.0);
  double peak = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t kb = f[i].size() - 1;
    const double ea = samples.eps[i][kb - 1];
    const double eb = samples.eps[i][kb];
    const double ra = f[i][kb - 1].imag() / std::numbers::pi;
    const double rb = f[i][kb].imag() / std::numbers::pi;
    density[i] = extrapolate(ea, ra, eb, rb);
    finest[i] = rb;
    peak = std::max(peak, std::abs(density[i]));
  }
  std::vector<double> flagged;
  for (std::size_t i = 0; i < n; ++i) {
    const double scale = std::max(std::abs(density[i]), 1e-3 * peak);
    if (std::abs(density[i] - finest[i]) > options.disagreement * scale) {
      flagged.push_back(samples.lambda[i]);
    }
    density[i] = std::max(density[i], 0.0);
  }
  for (const Atom& a : atoms) {
    auto it = std::lower_bound(samples.lambda.begin(), samples.lambda.end(), a.loc);
    if (it != samples.lambda.end() && *it == a.loc) density[it - samples.lambda.begin()] = 0.0;
  }

  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.loc < y.loc; });
  double atom_total = 0.0;
  for (const Atom& a : atoms) atom_total += a.mass;
  const std::vector<double> grid = n >= 2 ? samples.lambda : std::vector<double>{};
  if (n < 2) density.clear();
  const double cont = trapezoid_mass(grid, density);
  const double raw = atom_total + cont;
  if (std::abs(raw - 1.0) > options.max_mass_drift) {
    std::ostringstream msg;
    msg << "inverted measure has mass " << raw << " (drift above " << options.max_mass_drift << ")";
    throw NumericalError(msg.str());
  }
  if (cont > 1e-12 && atom_total < 1.0) {
    const double scale = (1.0 - atom_total) / cont;
    for (double& d : density) d *= scale;
  } else {
    for (Atom& a : atoms) a.mass /= atom_total;
    std::fill(density.begin(), density.end(), 0.0);
  }
  return {SpectralMeasure(std::move(atoms), grid, std::move(density)), std::move(flagged), raw};
}

}  // namespace jacspec
