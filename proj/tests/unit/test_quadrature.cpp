#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "jacspec/quadrature.hpp"

using namespace jacspec;

TEST_SUITE("quadrature") {

TEST_CASE("gauss-legendre is exact through degree 2n-1") {
  for (int n : {2, 5, 10, 20}) {
    const quad::Rule& r = quad::gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
      const double exact = (k % 2 == 1) ? 0.0 : 2.0 / (k + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
    }
  }
}

TEST_CASE("gauss-hermite reproduces normal moments") {
  const quad::Rule& r = quad::gauss_hermite(60);
  const double exact[] = {1, 0, 1, 0, 3, 0, 15, 0, 105};
  for (int k = 0; k <= 8; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], k);
    CHECK(s == doctest::Approx(exact[k]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("normal cdf reference values") {
  CHECK(quad::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(quad::normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(quad::normal_cdf(-1.96) == doctest::Approx(0.024997895148220435).epsilon(1e-13));
  CHECK(quad::normal_pdf(1.0) == doctest::Approx(0.24197072451914337).epsilon(1e-15));
}

TEST_CASE("kinked expectations match closed forms") {
  // E|gamma| = sqrt(2 / pi).
  const std::vector<double> kink0{0.0};
  const double abs_mean =
      quad::gaussian_expectation([](double x) { return std::abs(x); }, 0.0, 1.0, kink0, 50);
  CHECK(abs_mean == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-12));

  // E min(gamma^2, 1) = 1 - 2 phi(1).
  const std::vector<double> kinks{-1.0, 1.0};
  const double clipped = quad::gaussian_expectation(
      [](double x) { return std::min(x * x, 1.0); }, 0.0, 1.0, kinks, 50);
  CHECK(clipped == doctest::Approx(1.0 - 2.0 * 0.24197072451914337).epsilon(1e-12));

  // Shifted and scaled: P(|mean + sd gamma| < 1).
  const double p = quad::gaussian_expectation(
      [](double x) { return std::abs(x) < 1.0 ? 1.0 : 0.0; }, 0.3, 0.7, kinks, 50);
  const double exact = quad::normal_cdf((1.0 - 0.3) / 0.7) - quad::normal_cdf((-1.0 - 0.3) / 0.7);
  CHECK(p == doctest::Approx(exact).epsilon(1e-12));
}

}  // TEST_SUITE
