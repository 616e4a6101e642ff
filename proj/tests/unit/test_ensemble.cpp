#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "jacspec/ensemble.hpp"

using namespace jacspec;

namespace {

double mp_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 4.0) return 1.0;
  const double t = std::asin(std::sqrt(x) / 2.0);
  return 2.0 / std::numbers::pi * (t + std::sin(t) * std::cos(t));
}

// sup |F_hist - F_MP| over histogram edges, left limits.
double mp_distance(const EnsembleHistogram& h) {
  double worst = 0.0;
  for (double e : h.edges) worst = std::max(worst, std::abs(h.cdf(e) - mp_cdf(e)));
  return worst;
}

NetworkConfig hard_tanh_config(int depth, int n, double sigma2) {
  NetworkConfig c = NetworkConfig::square(depth, n, Activation(ActivationKind::hard_tanh));
  c.bias = BiasLaw::gaussian(sigma2);
  return c;
}

}  // namespace

TEST_SUITE("ensemble") {

TEST_CASE("config validation") {
  NetworkConfig c = NetworkConfig::square(2, 10, Activation(ActivationKind::tanh));
  CHECK_NOTHROW(c.validate());
  c.depth = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = NetworkConfig::square(2, 10, Activation(ActivationKind::sinh));
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.experimental = true;
  CHECK_NOTHROW(c.validate());
  c = NetworkConfig::square(1, 10, Activation(ActivationKind::linear));
  c.weight_law = EntryLaw::cauchy;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = NetworkConfig::square(1, 3, Activation(ActivationKind::linear));
  c.input = std::vector<double>{1.0, 2.0};
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("linear activation gives identity D") {
  NetworkConfig c = NetworkConfig::square(3, 20, Activation(ActivationKind::linear));
  c.bias = BiasLaw::gaussian(0.5);
  PhiloxStream s(5, 0);
  const ForwardPass p = forward_pass(c, s);
  REQUIRE(p.d.size() == 3);
  for (const auto& d : p.d) CHECK((d.array() == 1.0).all());
}

TEST_CASE("hard tanh zeroes D outside the linear region") {
  NetworkConfig c = hard_tanh_config(2, 50, 0.5);
  c.input = std::vector<double>(50, 3.0);
  PhiloxStream s(6, 0);
  const ForwardPass p = forward_pass(c, s);
  int saturated = 0;
  for (std::size_t l = 0; l < p.y.size(); ++l) {
    for (Eigen::Index j = 0; j < p.y[l].size(); ++j) {
      if (std::abs(p.y[l][j]) >= 1.0) {
        CHECK(p.d[l][j] == 0.0);
        ++saturated;
      } else {
        CHECK(p.d[l][j] == 1.0);
      }
    }
  }
  CHECK(saturated > 0);
}

TEST_CASE("two-neuron network matches a scalar recomputation") {
  const NetworkConfig c = hard_tanh_config(2, 2, 0.2);
  PhiloxStream s(123, 4);
  const ForwardPass p = forward_pass(c, s);
  const Eigen::MatrixXd j = jacobian(p);

  PhiloxStream r(123, 4);
  double x[2] = {r.normal(), r.normal()};
  const double norm = std::sqrt((x[0] * x[0] + x[1] * x[1]) / 2.0);
  x[0] /= norm;
  x[1] /= norm;
  const double scale = 1.0 / std::sqrt(2.0);
  double jac[2][2] = {{1, 0}, {0, 1}};
  for (int l = 0; l < 2; ++l) {
    double w[2][2];
    w[0][0] = scale * r.normal();
    w[1][0] = scale * r.normal();
    w[0][1] = scale * r.normal();
    w[1][1] = scale * r.normal();
    const double b0 = std::sqrt(0.2) * r.normal();
    const double b1 = std::sqrt(0.2) * r.normal();
    const double y0 = w[0][0] * x[0] + w[0][1] * x[1] + b0;
    const double y1 = w[1][0] * x[0] + w[1][1] * x[1] + b1;
    CHECK(p.y[l][0] == doctest::Approx(y0).epsilon(1e-14));
    CHECK(p.y[l][1] == doctest::Approx(y1).epsilon(1e-14));
    const double d0 = std::abs(y0) < 1.0 ? 1.0 : 0.0;
    const double d1 = std::abs(y1) < 1.0 ? 1.0 : 0.0;
    double next[2][2];
    for (int a = 0; a < 2; ++a) {
      const double d = a == 0 ? d0 : d1;
      for (int b = 0; b < 2; ++b) next[a][b] = d * (w[a][0] * jac[0][b] + w[a][1] * jac[1][b]);
    }
    std::copy(&next[0][0], &next[0][0] + 4, &jac[0][0]);
    x[0] = std::clamp(y0, -1.0, 1.0);
    x[1] = std::clamp(y1, -1.0, 1.0);
  }
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 2; ++b) CHECK(j(a, b) == doctest::Approx(jac[a][b]).epsilon(1e-14));
  }
  // Eigenvalues of J J^T from the 2x2 trace and determinant.
  const double t = jac[0][0] * jac[0][0] + jac[0][1] * jac[0][1] + jac[1][0] * jac[1][0] +
                   jac[1][1] * jac[1][1];
  const double det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
  const double disc = std::sqrt(std::max(0.0, t * t / 4 - det * det));
  PhiloxStream again(123, 4);
  const auto ev = squared_singular_values(jacobian_singular_values(c, again));
  REQUIRE(ev.size() == 2);
  CHECK(ev[0] == doctest::Approx(std::max(0.0, t / 2 - disc)).epsilon(1e-12).scale(1.0));
  CHECK(ev[1] == doctest::Approx(t / 2 + disc).epsilon(1e-12));
}

TEST_CASE("singular values are sorted and padded") {
  NetworkConfig c = NetworkConfig::square(1, 4, Activation(ActivationKind::linear));
  c.widths = {6, 4};
  PhiloxStream s(1, 0);
  const auto sv = jacobian_singular_values(c, s);
  REQUIRE(sv.size() == 4);
  CHECK(std::is_sorted(sv.rbegin(), sv.rend()));
  c.widths = {2, 4};
  PhiloxStream s2(1, 0);
  const auto padded = jacobian_singular_values(c, s2);
  REQUIRE(padded.size() == 4);
  CHECK(padded[2] == 0.0);
  CHECK(padded[3] == 0.0);
}

TEST_CASE("round-off negatives are clamped") {
  const auto ev = squared_singular_values({2.0, 1.0, 0.0});
  CHECK(ev == std::vector<double>{0.0, 1.0, 4.0});
  for (double v : ev) CHECK(v >= 0.0);
}

TEST_CASE("single neuron single sample") {
  const NetworkConfig c = NetworkConfig::square(1, 1, Activation(ActivationKind::linear));
  const EnsembleRun run = run_ensemble(c, 1, BinSpec{});
  REQUIRE(run.eigenvalues.size() == 1);
  PhiloxStream s(0, 0);
  s.normal();  // input entry, rescaled to +-1
  const double w = s.normal();
  CHECK(run.eigenvalues[0] == doctest::Approx(w * w).epsilon(1e-14));
  int occupied = 0;
  for (double d : run.histogram.density) occupied += d > 0.0;
  CHECK(occupied == 1);
  CHECK(run.histogram.cdf(run.histogram.edges.back() + 1.0) == doctest::Approx(1.0));
}

TEST_CASE("histogram is normalized") {
  const std::vector<double> v{0.1, 0.2, 0.2, 0.9, 1.5, 3.0};
  for (bool log_binned : {false, true}) {
    BinSpec spec;
    spec.bins = 17;
    spec.log_binned = log_binned;
    const EnsembleHistogram h = make_histogram(v, spec, 1);
    double mass = 0.0;
    for (std::size_t i = 0; i < h.density.size(); ++i) {
      mass += h.density[i] * (h.edges[i + 1] - h.edges[i]);
    }
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.out_of_range == 0);
  }
  std::stringstream ss;
  const EnsembleHistogram h = make_histogram(v, BinSpec{}, 1);
  h.write_csv(ss);
  const EnsembleHistogram back = EnsembleHistogram::read_csv(ss);
  CHECK(empirical_cdf_distance(h, back) < 1e-12);
}

TEST_CASE("cdf distance on trivial inputs") {
  const auto mp = SpectralMeasure::marchenko_pastur(4000);
  CHECK(empirical_cdf_distance(mp, mp) == 0.0);
  CHECK(empirical_cdf_distance(SpectralMeasure::point_mass(0.0), SpectralMeasure::point_mass(1.0)) ==
        doctest::Approx(1.0));
  const EnsembleHistogram h = make_histogram({0.5, 1.5, 2.5}, BinSpec{}, 1);
  CHECK(empirical_cdf_distance(h, h) == 0.0);
}

TEST_CASE("small marchenko-pastur ensemble") {
  const NetworkConfig c = NetworkConfig::square(1, 300, Activation(ActivationKind::linear));
  const EnsembleRun run = run_ensemble(c, 10, BinSpec{});
  CHECK(run.accepted == 10);
  CHECK(run.rejected == 0);
  for (double v : run.eigenvalues) CHECK(v >= 0.0);
  CHECK(mp_distance(run.histogram) < 0.03);
  CHECK(empirical_cdf_distance(run.histogram, SpectralMeasure::marchenko_pastur()) < 0.03);
  CHECK(run.histogram.moment(1) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("seed determinism across thread counts") {
  NetworkConfig c = hard_tanh_config(2, 40, 0.1);
  c.seed = 99;
  const EnsembleRun one = run_ensemble(c, 12, BinSpec{}, 1);
  const EnsembleRun three = run_ensemble(c, 12, BinSpec{}, 3);
  CHECK(one.eigenvalues == three.eigenvalues);
  CHECK(one.histogram.edges == three.histogram.edges);
  CHECK(one.histogram.density == three.histogram.density);
}

TEST_CASE("sample order does not change the histogram") {
  NetworkConfig c = hard_tanh_config(2, 30, 0.1);
  c.seed = 7;
  BinSpec spec;
  spec.lo = 0.0;
  spec.hi = 8.0;
  const EnsembleRun run = run_ensemble(c, 9, spec);
  std::vector<double> reversed;
  for (int i = 8; i >= 0; --i) {
    PhiloxStream s(7, static_cast<std::uint64_t>(i));
    const auto ev = squared_singular_values(jacobian_singular_values(c, s));
    reversed.insert(reversed.end(), ev.begin(), ev.end());
  }
  const EnsembleHistogram h = make_histogram(reversed, spec, 9);
  CHECK(h.density == run.histogram.density);
}

TEST_CASE("first moment is bounded by the linear factor") {
  // L = 1: n^{-1} Tr(D W W^T D) <= Phi_1^2 n^{-1} Tr(W W^T).
  for (auto kind : {ActivationKind::tanh, ActivationKind::hard_tanh, ActivationKind::sin}) {
    NetworkConfig c = NetworkConfig::square(1, 60, Activation(kind));
    c.bias = BiasLaw::gaussian(0.3);
    const double phi1 = *c.activation.sup_derivative();
    for (std::uint64_t i = 0; i < 5; ++i) {
      PhiloxStream s(3, i);
      const ForwardPass p = forward_pass(c, s);
      const Eigen::MatrixXd j = jacobian(p);
      const double mean = j.squaredNorm() / 60;
      const double wishart = p.weights[0].squaredNorm() / 60;
      CHECK(mean <= phi1 * phi1 * wishart * (1 + 1e-12));
    }
  }
  // Depth 3: mean eigenvalue <= Phi_1^{2L} prod ||W^l||^2.
  NetworkConfig c = NetworkConfig::square(3, 40, Activation(ActivationKind::tanh));
  c.bias = BiasLaw::gaussian(0.3);
  PhiloxStream s(4, 0);
  const ForwardPass p = forward_pass(c, s);
  double bound = 1.0;
  for (const auto& w : p.weights) bound *= std::pow(w.operatorNorm(), 2);
  CHECK(jacobian(p).squaredNorm() / 40 <= bound);
}

TEST_CASE("unbounded experimental activation rejects overflowing samples") {
  NetworkConfig c = NetworkConfig::square(1, 4, Activation(ActivationKind::sinh));
  c.experimental = true;
  c.input = std::vector<double>(4, 1e3);
  PhiloxStream s(1, 0);
  CHECK_THROWS_AS(forward_pass(c, s), SampleRejected);
  CHECK_THROWS_AS(run_ensemble(c, 3, BinSpec{}), NumericalError);
}

}  // TEST_SUITE
