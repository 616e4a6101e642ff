#include "jacspec/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "jacspec/errors.hpp"

namespace jacspec::quad {
namespace {

Rule make_gauss_legendre(int n) {
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
Rule make_gauss_hermite(int n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n > 1 ? n - 1 : 0);
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("Gauss-Hermite eigen decomposition failed");
  }
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = solver.eigenvalues()[i];
    const double v = solver.eigenvectors()(0, i);
    rule.weights[i] = v * v;
    total += rule.weights[i];
  }
  for (double& w : rule.weights) w /= total;
  // Symmetrize to remove eigen-solver asymmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

template <Rule (*Make)(int)>
const Rule& cached(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Rule>> cache;
  if (n < 1) throw DomainError("quadrature rule needs at least one node");
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Rule>(Make(n));
  return *slot;
}

}  // namespace

const Rule& gauss_legendre(int n) { return cached<make_gauss_legendre>(n); }
const Rule& gauss_hermite(int n) { return cached<make_gauss_hermite>(n); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double gaussian_expectation(const std::function<double(double)>& g, double mean,
                            double sd, std::span<const double> kinks, int nodes) {
  if (sd <= 0.0) return g(mean);
  if (kinks.empty()) {
    const Rule& rule = gauss_hermite(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      sum += rule.weights[i] * g(mean + sd * rule.nodes[i]);
    }
    return sum;
  }

  constexpr double kCut = 12.0;
  std::vector<double> breaks{-kCut, kCut};
  for (double kink : kinks) {
    const double t = (kink - mean) / sd;
    if (t > -kCut && t < kCut) breaks.push_back(t);
  }
  std::sort(breaks.begin(), breaks.end());
  const Rule& rule = gauss_legendre(nodes);
  double sum = 0.0;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double a = breaks[p];
    const double b = breaks[p + 1];
    if (b - a <= 0.0) continue;
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = mid + half * rule.nodes[i];
      sum += half * rule.weights[i] * normal_pdf(t) * g(mean + sd * t);
    }
  }
  return sum;
}

}  // namespace jacspec::quad
