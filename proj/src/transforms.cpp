#include "jacspec/transforms.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "jacspec/errors.hpp"

namespace jacspec {
namespace {

// Coefficients of z^L (-f)^{L+1} + z f + 1, lowest degree first.
std::vector<cplx> baseline_poly(int L, cplx z) {
  std::vector<cplx> c(L + 2, cplx(0.0));
  c[0] = 1.0;
  c[1] += z;
  c[L + 1] += (L % 2 == 0 ? -1.0 : 1.0) * std::pow(z, L);
  return c;
}

std::vector<cplx> poly_roots(const std::vector<cplx>& c) {
  const int deg = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);
  std::vector<cplx> r(deg);
  for (int i = 0; i < deg; ++i) r[i] = es.eigenvalues()[i];
  return r;
}

cplx newton_polish(const std::vector<cplx>& c, cplx f) {
  for (int it = 0; it < 3; ++it) {
    cplx p = 0.0;
    cplx dp = 0.0;
    for (std::size_t j = c.size(); j-- > 0;) {
      dp = dp * f + p;
      p = p * f + c[j];
    }
    if (std::abs(dp) == 0.0) break;
    f -= p / dp;
  }
  return f;
}

bool herglotz_admissible(cplx f, cplx z) {
  if (z.imag() != 0.0) return f.imag() * z.imag() > 0.0;
  return f.real() > 0.0 && std::abs(f.imag()) <= 1e-9 * std::abs(f);
}

}  // namespace

cplx linear_case_baseline(int L, ComplexGridPoint zp) {
  if (L < 1) throw DomainError("linear baseline needs L >= 1");
  const cplx z = zp.value();
  std::vector<cplx> path;
  constexpr double kFar = 1e4;
  constexpr double kRatio = 1.1;
  if (z.imag() == 0.0) {
    for (double t = std::max(1.0, kFar / std::abs(z)); t > 1.0; t /= kRatio) path.push_back(z * t);
  } else {
    const double s_top = std::max(1.0, kFar / std::abs(z.imag()));
    for (double s = s_top; s > 1.0; s /= kRatio) path.emplace_back(z.real(), z.imag() * s);
  }
  path.push_back(z);

  cplx f = -1.0 / path.front();
  std::vector<cplx> roots;
  for (const cplx& w : path) {
    roots = poly_roots(baseline_poly(L, w));
    f = *std::min_element(roots.begin(), roots.end(),
                          [&](cplx a, cplx b) { return std::abs(a - f) < std::abs(b - f); });
  }
  const std::vector<cplx> coeffs = baseline_poly(L, z);
  f = newton_polish(coeffs, f);
  if (!herglotz_admissible(f, z) && !(z.imag() == 0.0 && f.real() > 0.0)) {
    std::ostringstream msg;
    msg << "linear baseline: tracked root " << f << " at z = " << z << " is not admissible";
    throw NumericalError(msg.str());
  }
  int close = 0;
  for (const cplx& r : roots) {
    if (herglotz_admissible(r, z) && std::abs(r - f) < 1e-6) ++close;
  }
  if (close > 1) {
    std::ostringstream msg;
    msg << "linear baseline: branch ambiguity at z = " << z;
    throw NumericalError(msg.str());
  }
  return f;
}

double linear_case_density(int L, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("density needs lambda > 0");
  const cplx f = linear_case_baseline(L, ComplexGridPoint(lambda, 1e-10 * std::min(1.0, lambda)));
  return std::max(f.imag(), 0.0) / std::numbers::pi;
}

double linear_case_edge(int L) {
  return L * std::pow(1.0 + 1.0 / L, L + 1);
}

double moment_generating(const SpectralMeasure& nu, double z) {
  if (!(z < 0.0)) throw DomainError("moment generating function is evaluated at z < 0");
  return z * nu.resolvent_moment(1, 1, -z, 1.0).real();
}

MomentFunction moment_function(const SpectralMeasure& nu) {
  return [nu](double z) { return moment_generating(nu, z); };
}

MomentFunction diamond_moment_function(SpectralMeasure nu_K, SpectralMeasure nu_R,
                                       HkOptions options) {
  return [K = std::move(nu_K), R = std::move(nu_R), options](double zeta) {
    if (!(zeta < 0.0)) throw DomainError("moment generating function is evaluated at z < 0");
    const HkPoint p = solve_hk(R, K, ComplexGridPoint(1.0 / zeta, 0.0), options);
    if (!p.converged) throw NumericalError("solve_hk failed: " + p.failure);
    return -(p.h * p.k).real() / options.c;
  };
}

std::optional<double> inverse_moment(const MomentFunction& m, double target) {
  double lo = std::log(1e-14);
  double hi = std::log(1e14);
  auto mt = [&](double t) { return m(-std::exp(t)); };
  const double m_lo = mt(lo);
  const double m_hi = mt(hi);
  if (!(target < m_lo && target > m_hi)) return std::nullopt;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mt(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return -std::exp(0.5 * (lo + hi));
}

TransformTable TransformTable::build(const MomentFunction& m, const std::vector<double>& z_points,
                                     const std::vector<double>& m_points) {
  TransformTable t;
  for (double z : z_points) t.m_samples.emplace_back(z, m(z));
  std::sort(t.m_samples.begin(), t.m_samples.end());
  for (double mv : m_points) {
    if (auto z = inverse_moment(m, mv)) {
      t.inverse_samples.emplace_back(mv, *z);
      t.sigma_samples.emplace_back(mv, *z / mv);
    }
  }
  return t;
}

bool TransformTable::monotone() const {
  for (std::size_t i = 1; i < m_samples.size(); ++i) {
    if (!(m_samples[i].second > m_samples[i - 1].second)) return false;
  }
  return true;
}

TransformCheck s_transform_check(const MomentFunction& nu_K, const MomentFunction& nu_R,
                                 const MomentFunction& nu_M, const std::vector<double>& m_points) {
  TransformCheck out;
  for (double m : m_points) {
    const auto zk = inverse_moment(nu_K, m);
    const auto zr = inverse_moment(nu_R, m);
    const auto zm = inverse_moment(nu_M, m);
    if (!zk || !zr || !zm) {
      std::ostringstream msg;
      msg << "m = " << m << " is outside the range of m_" << (!zk ? "K" : !zr ? "R" : "M");
      out.warnings.push_back(msg.str());
      continue;
    }
    const double dev = std::abs(*zm / m - (*zk / m) * (*zr / m));
    out.max_deviation = std::max(out.max_deviation, dev);
    out.used.push_back(m);
  }
  return out;
}

TransformCheck s_transform_check(const SpectralMeasure& nu_K, const SpectralMeasure& nu_R,
                                 const SpectralMeasure& nu_M, const std::vector<double>& m_points) {
  return s_transform_check(moment_function(nu_K), moment_function(nu_R), moment_function(nu_M),
                           m_points);
}

PenningtonCheck pennington_residual(const MomentFunction& nu_M_L, const MomentFunction& nu_K,
                                    int L, const std::vector<double>& z_points) {
  if (L < 1) throw DomainError("pennington residual needs L >= 1");
  PenningtonCheck out;
  for (double z : z_points) {
    if (!(z < 0.0)) throw DomainError("pennington residual is evaluated at z < 0");
    const double m = nu_M_L(z);
    if (!(m > -1.0 && m < 0.0)) {
      std::ostringstream msg;
      msg << "z = " << z << ": m = " << m << " outside (-1, 0)";
      out.warnings.push_back(msg.str());
      continue;
    }
    const double w = -std::pow(std::abs(z * std::pow(m, L - 1)) * (1.0 + m), 1.0 / L);
    out.max_residual = std::max(out.max_residual, std::abs(nu_K(w) - m));
    out.used.push_back(z);
  }
  return out;
}

PenningtonCheck pennington_residual(const SpectralMeasure& nu_M_L, const SpectralMeasure& nu_K,
                                    int L, const std::vector<double>& z_points) {
  return pennington_residual(moment_function(nu_M_L), moment_function(nu_K), L, z_points);
}

}  // namespace jacspec
