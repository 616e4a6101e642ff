// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "jacspec/activation.hpp"
#include "jacspec/cli/commands.hpp"
#include "jacspec/cli/config.hpp"
#include "jacspec/ensemble.hpp"
#include "jacspec/hk_solver.hpp"
#include "jacspec/rng.hpp"
#include "jacspec/transforms.hpp"

using namespace jacspec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !o.pass;
  std::printf("criterion %d %-34s %s  %s  (%.1f s)\n", id, name.c_str(), o.pass ? "PASS" : "FAIL",
              o.detail.c_str(), s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double mp_cdf(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 4.0) return 1.0;
  const double t = std::asin(std::sqrt(x) / 2.0);
  return 2.0 / std::numbers::pi * (t + std::sin(t) * std::cos(t));
}

cplx mp_stieltjes(cplx z) {
  const cplx s = std::sqrt(z * z - 4.0 * z);
  const cplx a = (-z + s) / (2.0 * z);
  const cplx b = (-z - s) / (2.0 * z);
  if (z.imag() == 0.0) return a.real() > 0.0 ? a : b;
  return a.imag() * z.imag() > 0.0 ? a : b;
}

int threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::vector<SpectralMeasure> linear_layers(int depth) {
  LayerCompositionPlan plan;
  plan.nu_K.assign(depth, SpectralMeasure::point_mass(1.0));
  std::vector<SpectralMeasure> out;
  for (const DiamondResult& r : compose_layers(plan)) out.push_back(r.measure);
  return out;
}

SpectralMeasure read_measure(const fs::path& p) {
  std::ifstream in(p);
  return SpectralMeasure::read_csv(in);
}

const std::vector<double> kMPoints{-0.05, -0.1, -0.15, -0.2, -0.25};

}  // namespace

int main() {
  const fs::path work = fs::temp_directory_path() / "jacspec_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);
  const std::vector<SpectralMeasure> linear = linear_layers(3);

  report(1, "MP reproduction", [] {
    const NetworkConfig c = NetworkConfig::square(1, 1000, Activation(ActivationKind::linear));
    const EnsembleRun run = run_ensemble(c, 50, BinSpec{}, threads());
    double d = 0.0;
    for (double e : run.histogram.edges) d = std::max(d, std::abs(run.histogram.cdf(e) - mp_cdf(e)));
    return Outcome{d < 0.02, fmt("sup-CDF %.3g < %.3g", d, 0.02)};
  });

  report(2, "solver closed form", [] {
    const auto one = SpectralMeasure::point_mass(1.0);
    std::vector<cplx> zs;
    for (double xi : {0.01, 0.3, 1.0, 5.0, 40.0}) zs.emplace_back(-xi, 0.0);
    for (double re : {-2.0, 0.5, 2.0, 3.9, 6.0}) {
      for (double im : {1e-2, 0.5, 3.0}) zs.emplace_back(re, im);
    }
    double worst = 0.0;
    for (cplx z : zs) {
      const HkPoint p = solve_hk(one, one, ComplexGridPoint(z));
      worst = std::max(worst, p.converged ? std::abs(p.f - mp_stieltjes(z)) : INFINITY);
    }
    return Outcome{worst < 1e-8, fmt("max |df| %.3g < %.3g", worst, 1e-8) + " over 20 z"};
  });

  report(3, "edge formula", [&] {
    double solver = 0.0;
    double ensemble = 0.0;
    for (int L = 1; L <= 3; ++L) {
      const double a = linear_case_edge(L);
      solver = std::max(solver, std::abs(linear[L - 1].support_edge() / a - 1.0));
      const NetworkConfig c = NetworkConfig::square(L, 1000, Activation(ActivationKind::linear));
      PhiloxStream s(c.seed, 0);
      const auto sv = jacobian_singular_values(c, s);
      ensemble = std::max(ensemble, std::abs(sv.front() * sv.front() / a - 1.0));
    }
    return Outcome{solver < 0.02 && ensemble < 0.05,
                   fmt("solver rel %.3g < 0.02, ensemble rel %.3g < 0.05", solver, ensemble)};
  });

  report(4, "zero-singularity exponent", [&] {
    const SpectralMeasure& m = linear[1];
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < m.grid().size(); ++i) {
      const double x = m.grid()[i];
      if (x < 1e-4 || x > 1e-2 || m.density()[i] <= 0.0) continue;
      const double lx = std::log(x);
      const double ly = std::log(m.density()[i]);
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
      ++n;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return Outcome{n >= 10 && std::abs(slope + 2.0 / 3.0) < 0.05,
                   fmt("slope %.4f vs -2/3 +- 0.05, %g nodes", slope, n)};
  });

  const fs::path ht = work / "hard_tanh";
  report(5, "sim vs theory, HardTanh L=2", [&] {
    cli::RunConfig config = cli::parse_config(nlohmann::json::parse(R"({
      "seed": 2024,
      "network": {"depth": 2, "width": 1000, "activation": "hard_tanh",
                  "weight_law": "gaussian", "bias_sigma2": 0.01},
      "ensemble": {"samples": 1000}
    })"));
    config.out = ht.string();
    std::ostringstream log;
    cli::cmd_solve(config, log);
    cli::cmd_simulate(config, threads(), log);
    const cli::ComparisonReport r =
        cli::compare_distributions(cli::read_distribution((ht / "histogram.csv").string()),
                                   cli::read_distribution((ht / "density.csv").string()), {});
    return Outcome{r.sup_cdf < 0.03, fmt("sup-CDF %.3g < %.3g", r.sup_cdf, 0.03)};
  });

  report(6, "universality", [] {
    const std::vector<EntryLaw> laws{EntryLaw::gaussian, EntryLaw::rademacher, EntryLaw::uniform};
    std::vector<EnsembleHistogram> h;
    for (EntryLaw law : laws) {
      NetworkConfig c = NetworkConfig::square(2, 500, Activation(ActivationKind::hard_tanh));
      c.bias = BiasLaw::gaussian(0.01);
      c.weight_law = law;
      c.seed = 7;
      h.push_back(run_ensemble(c, 200, BinSpec{}, threads()).histogram);
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
      for (std::size_t j = i + 1; j < h.size(); ++j) worst = std::max(worst, empirical_cdf_distance(h[i], h[j]));
    }
    return Outcome{worst < 0.05, fmt("max pairwise sup-CDF %.3g < %.3g", worst, 0.05)};
  });

  report(7, "transform identity", [&] {
    // Point-mass inputs through the solver-backed moment function.
    double delta = 0.0;
    for (double c : {1.0, 2.0}) {
      const auto K = SpectralMeasure::point_mass(c);
      const auto R = SpectralMeasure::point_mass(1.0);
      const TransformCheck t = s_transform_check(moment_function(K), moment_function(R),
                                                 diamond_moment_function(K, R), kMPoints);
      if (t.used.size() != kMPoints.size()) return Outcome{false, "m-points skipped"};
      delta = std::max(delta, t.max_deviation);
    }
    // HardTanh L=2 grid measures written by criterion 5.
    const SpectralMeasure K2 = read_measure(ht / "nu_K_layer2.csv");
    const SpectralMeasure M1 = read_measure(ht / "density_layer1.csv");
    const SpectralMeasure M2 = read_measure(ht / "density_layer2.csv");
    const TransformCheck t = s_transform_check(K2, M1, M2, kMPoints);
    if (t.used.size() != kMPoints.size()) return Outcome{false, "m-points skipped"};
    return Outcome{delta < 1e-6 && t.max_deviation < 1e-3,
                   fmt("point masses %.3g < 1e-6, HardTanh %.3g < 1e-3", delta, t.max_deviation)};
  });

  report(8, "equal-q residual, linear L=2", [&] {
    std::vector<double> zs;
    for (int i = 0; i <= 30; ++i) zs.push_back(-20.0 + 0.5 * i);
    const PenningtonCheck p = pennington_residual(linear[1], SpectralMeasure::point_mass(1.0), 2, zs);
    return Outcome{p.used.size() == zs.size() && p.max_residual < 1e-3,
                   fmt("max residual %.3g < %.3g", p.max_residual, 1e-3)};
  });

  report(9, "property suites", [&] {
    int bad = 0;
    int checks = 0;
    auto expect = [&](bool ok) { ++checks; bad += !ok; };
    PhiloxStream s(99, 0);

    // Herglotz signs on random measures.
    for (int i = 0; i < 100; ++i) {
      std::vector<Atom> atoms;
      double total = 0.0;
      for (int a = 0; a < 3; ++a) {
        atoms.push_back({5.0 * s.uniform() + 0.01 * a, 0.1 + s.uniform()});
        total += atoms.back().mass;
      }
      for (Atom& a : atoms) a.mass /= total;
      const SpectralMeasure mu = SpectralMeasure::discrete(atoms);
      for (int j = 0; j < 100; ++j) {
        const cplx z(10.0 * s.uniform() - 3.0, (s.uniform() < 0.5 ? -1.0 : 1.0) * (1e-3 + s.uniform()));
        expect(stieltjes(mu, ComplexGridPoint(z)).imag() * z.imag() > 0.0);
      }
    }
    const Activation ht_act(ActivationKind::hard_tanh);
    const BiasLaw bias = BiasLaw::gaussian(0.01);
    const SpectralMeasure K = nu_K(find_q_fixed_point(ht_act, bias), ht_act, bias);
    const double kappa2 = K.moment(2);
    for (int j = 0; j < 100; ++j) {
      const cplx z(6.0 * s.uniform() - 1.0, std::pow(10.0, -3.0 + 3.0 * s.uniform()));
      const HkPoint p = solve_hk(linear[0], K, ComplexGridPoint(z));
      expect(p.converged && p.h.imag() * z.imag() > 0.0 && p.k.imag() * z.imag() < 0.0);
    }
    for (double xi : {1e-3, 1.0, 1e3}) {
      const HkPoint p = solve_hk(linear[0], K, ComplexGridPoint(-xi, 0.0));
      expect(p.converged && p.k.real() > 0.0 && p.k.real() <= std::sqrt(kappa2) + 1e-12);
    }

    // Mass conservation of diamond outputs.
    for (const SpectralMeasure& m : linear) expect(std::abs(m.total_mass() - 1.0) <= 1e-3);
    for (const char* name : {"density_layer1.csv", "density_layer2.csv"}) {
      expect(std::abs(read_measure(ht / name).total_mass() - 1.0) <= 1e-3);
    }

    // nu_K(linear) = delta_1 and the trivial q step.
    const Activation lin(ActivationKind::linear);
    for (double s2 : {0.0, 0.01, 0.3}) {
      const SpectralMeasure d = nu_K(1.0 + s2, lin, BiasLaw::gaussian(s2));
      expect(d.atoms().size() == 1 && d.atoms()[0].loc == 1.0 && d.atoms()[0].mass == 1.0 &&
             d.grid().empty());
      for (double q : {0.5, 1.0 + s2, 2.0}) {
        if (q < s2) continue;
        expect(std::abs(q_step(q, lin, BiasLaw::gaussian(s2)) - (q + s2)) < kQuadratureTolerance);
      }
    }

    // Initialization independence.
    const HkOptions opt;
    for (cplx z : {cplx(-0.5, 0.0), cplx(0.7, 0.05), cplx(2.5, 0.2)}) {
      const HkPoint ref = solve_hk(linear[0], K, ComplexGridPoint(z), opt);
      const double scale = std::max(1.0, std::abs(ref.h) + std::abs(ref.k));
      for (int i = 0; i < 20; ++i) {
        const cplx h0 = z.imag() == 0.0 ? cplx(5.0 * s.uniform(), 0.0)
                                         : cplx(4.0 * s.uniform() - 2.0, 3.0 * s.uniform());
        const cplx k0 = z.imag() == 0.0 ? cplx(std::sqrt(kappa2) * s.uniform(), 0.0)
                                         : cplx(2.0 * s.uniform() - 1.0, -s.uniform());
        const HkPoint p = solve_hk(linear[0], K, ComplexGridPoint(z), opt, std::pair{h0, k0});
        expect(p.converged && std::abs(p.h - ref.h) < 10 * opt.tol * scale &&
               std::abs(p.k - ref.k) < 10 * opt.tol * scale);
      }
    }

    // Seed-determinism replay.
    NetworkConfig c = NetworkConfig::square(2, 60, ht_act);
    c.bias = bias;
    c.seed = 31;
    const EnsembleRun a = run_ensemble(c, 8, BinSpec{}, 1);
    const EnsembleRun b = run_ensemble(c, 8, BinSpec{}, 4);
    expect(a.eigenvalues == b.eigenvalues && a.histogram.density == b.histogram.density);

    return Outcome{bad == 0, fmt("%g failures in %g checks", bad, checks)};
  });

  std::printf("%s: %d criteria failed\n", failures == 0 ? "ACCEPTED" : "REJECTED", failures);
  return failures == 0 ? 0 : 1;
}
