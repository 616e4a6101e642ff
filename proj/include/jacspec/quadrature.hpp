#pragma once

#include <functional>
#include <span>
#include <vector>

namespace jacspec::quad {

/// Nodes and weights of a one-dimensional quadrature rule.
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule on [-1, 1]. Cached per node count.
const Rule& gauss_legendre(int n);

/// Gauss-Hermite rule for the standard normal law: sum w_i g(x_i) ~ E g(N(0,1)).
/// Weights sum to one. Cached per node count.
const Rule& gauss_hermite(int n);

double normal_pdf(double x);
double normal_cdf(double x);

/// E g(mean + sd * gamma), gamma ~ N(0,1).
///
/// Without kinks a `nodes`-point Gauss-Hermite rule is used. When the
/// integrand has kinks (points where g is not smooth), the gamma axis is
/// truncated to [-12, 12] and split at the kink pre-images; each piece gets a
/// `nodes`-point Gauss-Legendre rule against the normal density.
double gaussian_expectation(const std::function<double(double)>& g, double mean,
                            double sd, std::span<const double> kinks, int nodes);

}  // namespace jacspec::quad
