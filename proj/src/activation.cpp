#include "jacspec/activation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <sstream>

#include "jacspec/errors.hpp"

namespace jacspec {

Activation Activation::parse(const std::string& name) {
  if (name == "linear") return Activation(ActivationKind::linear);
  if (name == "hard_tanh" || name == "hardtanh") return Activation(ActivationKind::hard_tanh);
  if (name == "tanh") return Activation(ActivationKind::tanh);
  if (name == "sin") return Activation(ActivationKind::sin);
  if (name == "sinh") return Activation(ActivationKind::sinh);
  throw ConfigError("unknown activation '" + name + "'");
}

std::string Activation::name() const {
  switch (kind_) {
    case ActivationKind::linear: return "linear";
    case ActivationKind::hard_tanh: return "hard_tanh";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::sin: return "sin";
    case ActivationKind::sinh: return "sinh";
  }
  return "?";
}

double Activation::value(double x) const {
  switch (kind_) {
    case ActivationKind::linear: return x;
    case ActivationKind::hard_tanh: return std::clamp(x, -1.0, 1.0);
    case ActivationKind::tanh: return std::tanh(x);
    case ActivationKind::sin: return std::sin(x);
    case ActivationKind::sinh: return std::sinh(x);
  }
  return 0.0;
}

double Activation::derivative(double x) const {
  switch (kind_) {
    case ActivationKind::linear: return 1.0;
    case ActivationKind::hard_tanh: return (x > -1.0 && x < 1.0) ? 1.0 : 0.0;
    case ActivationKind::tanh: {
      const double c = 1.0 / std::cosh(x);
      return c * c;
    }
    case ActivationKind::sin: return std::cos(x);
    case ActivationKind::sinh: return std::cosh(x);
  }
  return 0.0;
}

std::optional<double> Activation::sup_value() const {
  switch (kind_) {
    case ActivationKind::hard_tanh:
    case ActivationKind::tanh:
    case ActivationKind::sin: return 1.0;
    default: return std::nullopt;
  }
}

std::optional<double> Activation::sup_derivative() const {
  if (kind_ == ActivationKind::sinh) return std::nullopt;
  return 1.0;
}

std::vector<double> Activation::kinks() const {
  if (kind_ == ActivationKind::hard_tanh) return {-1.0, 1.0};
  return {};
}

BiasLaw BiasLaw::zero() { return BiasLaw(); }

BiasLaw BiasLaw::gaussian(double sigma2) {
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) {
    throw ConfigError("bias variance must be finite and nonnegative");
  }
  BiasLaw law;
  if (sigma2 == 0.0) return law;
  law.kind_ = Kind::gaussian;
  law.sigma2_ = sigma2;
  return law;
}

BiasLaw BiasLaw::discrete(std::vector<double> points, std::vector<double> masses) {
  if (points.empty() || points.size() != masses.size()) {
    throw ConfigError("discrete bias law needs matching nonempty points and masses");
  }
  double total = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(masses[i] > 0.0) || !std::isfinite(points[i])) {
      throw ConfigError("discrete bias law needs positive masses and finite points");
    }
    total += masses[i];
    mean += masses[i] * points[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("discrete bias masses must sum to 1");
  if (std::abs(mean) > 1e-12) throw ConfigError("discrete bias law must have mean 0");
  BiasLaw law;
  law.kind_ = Kind::discrete;
  law.points_ = std::move(points);
  law.masses_ = std::move(masses);
  return law;
}

double BiasLaw::variance() const {
  switch (kind_) {
    case Kind::zero: return 0.0;
    case Kind::gaussian: return sigma2_;
    case Kind::discrete: {
      double v = 0.0;
      for (std::size_t i = 0; i < points_.size(); ++i) v += masses_[i] * points_[i] * points_[i];
      return v;
    }
  }
  return 0.0;
}

quad::Rule BiasLaw::nodes(int gaussian_nodes) const {
  switch (kind_) {
    case Kind::zero: return {{0.0}, {1.0}};
    case Kind::discrete: return {points_, masses_};
    case Kind::gaussian: {
      quad::Rule rule = quad::gauss_hermite(gaussian_nodes);
      const double sd = std::sqrt(sigma2_);
      for (double& x : rule.nodes) x *= sd;
      return rule;
    }
  }
  return {};
}

namespace {

// `panelled` splits the gamma range into unit panels (plus the kinks) and
// integrates each by Gauss-Legendre, for integrands with poles close to the
// real axis at large sd where Gauss-Hermite converges slowly.
double statistic_with(const std::function<double(double)>& chi, double q, const BiasLaw& bias,
                      std::span<const double> kinks, int gamma_nodes, bool panelled = false) {
  const double sigma2 = bias.variance();
  if (q < sigma2 - 1e-14) throw DomainError("q must be at least sigma_b^2");
  const double sd = std::sqrt(std::max(q - sigma2, 0.0));
  const quad::Rule rule = bias.nodes(kBiasNodes);
  std::vector<double> breaks;
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double mean = rule.nodes[i];
    if (panelled && sd > 0.0) {
      breaks.assign(kinks.begin(), kinks.end());
      for (int t = -11; t <= 11; ++t) breaks.push_back(mean + sd * t);
      sum += rule.weights[i] * quad::gaussian_expectation(chi, mean, sd, breaks, gamma_nodes / 4);
    } else {
      sum += rule.weights[i] * quad::gaussian_expectation(chi, mean, sd, kinks, gamma_nodes);
    }
  }
  return sum;
}

}  // namespace

double activation_statistic(const std::function<double(double)>& chi, double q,
                            const BiasLaw& bias, std::span<const double> kinks) {
  double coarse = statistic_with(chi, q, bias, kinks, kGammaNodes);
  double fine = statistic_with(chi, q, bias, kinks, 2 * kGammaNodes);
  if (std::isfinite(coarse) && std::abs(fine - coarse) > kQuadratureTolerance) {
    coarse = statistic_with(chi, q, bias, kinks, kGammaNodes, true);
    fine = statistic_with(chi, q, bias, kinks, 2 * kGammaNodes, true);
  }
  if (!std::isfinite(coarse) || std::abs(fine - coarse) > kQuadratureTolerance) {
    std::ostringstream msg;
    msg << "quadrature did not converge: node doubling moved the result by "
        << std::abs(fine - coarse);
    throw NumericalError(msg.str());
  }
  return fine;
}

double q_step(double q_prev, const Activation& phi, const BiasLaw& bias) {
  const std::vector<double> kinks = phi.kinks();
  const double second_moment = activation_statistic(
      [&phi](double y) {
        const double v = phi.value(y);
        return v * v;
      },
      q_prev, bias, kinks);
  return second_moment + bias.variance();
}

std::vector<double> q_sequence(double q1, const Activation& phi, const BiasLaw& bias, int depth) {
  if (depth < 1) throw ConfigError("depth must be at least 1");
  if (!(q1 > bias.variance())) throw ConfigError("q1 must exceed sigma_b^2");
  std::vector<double> q{q1};
  for (int l = 1; l < depth; ++l) q.push_back(q_step(q.back(), phi, bias));
  return q;
}

double find_q_fixed_point(const Activation& phi, const BiasLaw& bias,
                          const FixedPointOptions& options) {
  if (phi.kind() == ActivationKind::linear) {
    throw ConfigError("linear activation has no isolated q fixed point");
  }
  const auto bound = phi.sup_value();
  if (!bound) throw ConfigError("q fixed point requires a bounded activation");
  const double lo = bias.variance();
  const double hi = (*bound) * (*bound) + lo;
  auto gap = [&](double q) { return q_step(q, phi, bias) - q; };

  std::deque<double> trajectory;
  auto record = [&](double q) {
    trajectory.push_back(q);
    if (trajectory.size() > 20) trajectory.pop_front();
  };

  std::optional<double> iterate_result;
  double q = hi;
  double x1 = q;
  int since_accel = 0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double g = gap(q);
    record(q);
    if (std::abs(g) < options.tolerance) {
      iterate_result = q;
      break;
    }
    double next = std::clamp(q + options.damping * g, lo, hi);
    ++since_accel;
    if (since_accel >= 2) {
      const double d1 = q - x1;
      const double d2 = next - q;
      const double denom = d2 - d1;
      if (std::abs(denom) > 1e-300) {
        const double acc = next - d2 * d2 / denom;
        if (std::isfinite(acc) && acc >= lo && acc <= hi) next = acc;
      }
      since_accel = 0;
    }
    x1 = q;
    q = next;
  }

  // A genuine fixed point is a sign change of gap() above quadrature noise;
  // the iteration can also stall on a plateau where gap() is only noise.
  constexpr double kNoise = 1e-14;
  if (iterate_result) {
    const double delta = std::max(1e-6, 1e-4 * *iterate_result);
    const double left = std::max(lo, *iterate_result - delta);
    const double right = std::min(hi, *iterate_result + delta);
    const bool rises = left == lo ? std::abs(gap(left)) < options.tolerance : gap(left) > kNoise;
    if (rises && gap(right) < -kNoise) return *iterate_result;
  }

  constexpr int kScan = 400;
  std::optional<std::pair<double, double>> bracket;
  double prev_q = lo;
  double prev_g = gap(lo);
  for (int i = 1; i <= kScan; ++i) {
    const double qi = lo + (hi - lo) * i / kScan;
    const double gi = gap(qi);
    if (prev_g > kNoise && gi <= 0.0) bracket = {prev_q, qi};
    prev_q = qi;
    prev_g = gi;
  }
  if (bracket) {
    auto [a, b] = *bracket;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
      const double m = 0.5 * (a + b);
      (gap(m) > 0.0 ? a : b) = m;
    }
    const double root = 0.5 * (a + b);
    if (std::abs(gap(root)) < options.tolerance) return root;
  } else if (std::abs(gap(lo)) < options.tolerance) {
    return lo;
  }

  std::ostringstream msg;
  msg << "q fixed point iteration did not converge; last iterates:";
  for (double t : trajectory) msg << ' ' << t;
  throw NumericalError(msg.str());
}

SpectralMeasure nu_K(double q, const Activation& phi, const BiasLaw& bias) {
  const double sigma2 = bias.variance();
  if (q < sigma2 - 1e-14) throw DomainError("q must be at least sigma_b^2");
  const double sd = std::sqrt(std::max(q - sigma2, 0.0));
  const quad::Rule bias_rule = bias.nodes(kBiasNodes);

  switch (phi.kind()) {
    case ActivationKind::linear:
      return SpectralMeasure::point_mass(1.0);

    case ActivationKind::hard_tanh: {
      double on = 0.0;
      for (std::size_t i = 0; i < bias_rule.nodes.size(); ++i) {
        const double b = bias_rule.nodes[i];
        double p = 0.0;
        if (sd > 0.0) {
          p = quad::normal_cdf((1.0 - b) / sd) - quad::normal_cdf((-1.0 - b) / sd);
        } else {
          p = std::abs(b) < 1.0 ? 1.0 : 0.0;
        }
        on += bias_rule.weights[i] * p;
      }
      on = std::clamp(on, 0.0, 1.0);
      std::vector<Atom> atoms;
      if (1.0 - on > 0.0) atoms.push_back({0.0, 1.0 - on});
      if (on > 0.0) atoms.push_back({1.0, on});
      return SpectralMeasure::discrete(std::move(atoms));
    }

    case ActivationKind::tanh:
    case ActivationKind::sin: {
      constexpr int kBins = 2000;
      const double top = *phi.sup_derivative() * *phi.sup_derivative();
      const double width = top / kBins;
      std::vector<double> bins(kBins, 0.0);
      auto deposit = [&](double v, double w) {
        const int j = std::clamp(static_cast<int>(v / width), 0, kBins - 1);
        bins[j] += w;
      };
      constexpr int kPanels = 2000;
      constexpr double kCut = 10.0;
      const quad::Rule& gl = quad::gauss_legendre(8);
      for (std::size_t i = 0; i < bias_rule.nodes.size(); ++i) {
        const double b = bias_rule.nodes[i];
        if (sd == 0.0) {
          const double d = phi.derivative(b);
          deposit(d * d, bias_rule.weights[i]);
          continue;
        }
        const double h = 2.0 * kCut / kPanels;
        for (int p = 0; p < kPanels; ++p) {
          const double mid = -kCut + (p + 0.5) * h;
          for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
            const double t = mid + 0.5 * h * gl.nodes[k];
            const double d = phi.derivative(sd * t + b);
            deposit(d * d, bias_rule.weights[i] * 0.5 * h * gl.weights[k] * quad::normal_pdf(t));
          }
        }
      }
      std::vector<double> grid(kBins + 1);
      std::vector<double> density(kBins + 1);
      for (int j = 0; j <= kBins; ++j) {
        grid[j] = j * width;
        const double left = j > 0 ? bins[j - 1] : bins[0];
        const double right = j < kBins ? bins[j] : bins[kBins - 1];
        density[j] = 0.5 * (left + right) / width;
      }
      double mass = 0.0;
      for (int j = 0; j < kBins; ++j) mass += 0.5 * (density[j] + density[j + 1]) * width;
      for (double& d : density) d /= mass;
      return SpectralMeasure({}, std::move(grid), std::move(density));
    }

    case ActivationKind::sinh:
      break;
  }
  throw ConfigError("activation '" + phi.name() + "' has no registered derivative structure");
}

}  // namespace jacspec
