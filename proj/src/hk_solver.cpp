#include "jacspec/hk_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>

#include "jacspec/errors.hpp"
#include "jacspec/format.hpp"

namespace jacspec {
namespace {

constexpr double kDampingStart = 0.5;
constexpr double kDampingFloor = 0.05;
constexpr int kMaxHalvings = 40;

struct System {
  const SpectralMeasure& R;
  const SpectralMeasure& K;
  cplx z;
  double c;

  cplx k_of(cplx h) const { return K.resolvent_moment(1, 1, h, 1.0); }
  cplx h_of(cplx k) const { return R.resolvent_moment(1, 1, k / c, -z); }
  cplx dk_dh(cplx h) const { return -K.resolvent_moment(2, 2, h, 1.0); }
  cplx dh_dk(cplx k) const { return -R.resolvent_moment(2, 2, k / c, -z) / c; }
};

struct Bounds {
  double r_first = 0.0;
  double k_first = 0.0;
  double kappa2 = 0.0;
};

// Solution class: Im h Im z > 0 and Im k Im z < 0 off the axis; h > 0 and
// 0 < k <= sqrt(kappa_2) on the negative axis. Degenerate inputs (all mass
// at 0) force h = 0 or k = 0 identically and are admitted as such.
bool admissible(cplx h, cplx k, cplx z, const Bounds& b) {
  if (!std::isfinite(h.real()) || !std::isfinite(h.imag()) || !std::isfinite(k.real()) ||
      !std::isfinite(k.imag())) {
    return false;
  }
  const bool h_zero = b.r_first == 0.0 && h == cplx(0.0);
  const bool k_zero = b.kappa2 == 0.0 && k == cplx(0.0);
  if (z.imag() != 0.0) {
    const double s = z.imag() > 0.0 ? 1.0 : -1.0;
    return (h_zero || s * h.imag() > 0.0) && (k_zero || s * k.imag() < 0.0);
  }
  const bool h_ok = h_zero || h.real() > 0.0;
  const bool k_ok = k_zero || (k.real() > 0.0 && k.real() <= std::sqrt(b.kappa2) * (1.0 + 1e-12));
  return h_ok && k_ok;
}

double relative(cplx dh, cplx dk, cplx h, cplx k) {
  return (std::abs(dh) + std::abs(dk)) / std::max(1.0, std::abs(h) + std::abs(k));
}

}  // namespace

HkPoint solve_hk(const SpectralMeasure& nu_R, const SpectralMeasure& nu_K, ComplexGridPoint zp,
                 const HkOptions& options, std::optional<std::pair<cplx, cplx>> start) {
  if (!(options.c > 0.0)) throw ConfigError("width ratio c must be positive");
  const cplx z = zp.value();
  const System sys{nu_R, nu_K, z, options.c};
  const Bounds bounds{nu_R.moment(1), nu_K.moment(1), nu_K.moment(2)};

  HkPoint p;
  p.z = z;
  try {
    cplx h;
    if (start) {
      h = 0.5 * (start->first + sys.h_of(start->second));
    } else {
      h = bounds.r_first / (bounds.k_first / options.c - z);
    }
    cplx k = sys.k_of(h);
    cplx hh = sys.h_of(k);
    double alpha = kDampingStart;
    double prev = HUGE_VAL;
    for (int it = 1; it <= options.max_iter; ++it) {
      p.iterations = it;
      const cplx kk = sys.k_of(hh);
      const double res = relative(hh - h, kk - k, hh, kk);
      if (res < options.tol) {
        h = hh;
        k = kk;
        p.residual = res;
        p.converged = true;
        break;
      }
      p.residual = res;

      // Newton on G(h) = h - H(K(h)) with backtracking: the first step length
      // that stays in the class and shrinks |G| is taken.
      const cplx g = h - hh;
      const cplx dg = 1.0 - sys.dh_dk(k) * sys.dk_dh(h);
      bool stepped = false;
      if (std::abs(dg) > 0.0) {
        const cplx step = -g / dg;
        double t = 1.0;
        for (int halving = 0; halving < kMaxHalvings && !stepped; ++halving, t *= 0.5) {
          const cplx cand = h + t * step;
          try {
            const cplx kc = sys.k_of(cand);
            const cplx hc = sys.h_of(kc);
            if (admissible(cand, kc, z, bounds) && std::abs(cand - hc) < std::abs(g)) {
              h = cand;
              k = kc;
              hh = hc;
              stepped = true;
            }
          } catch (const DomainError&) {
          }
        }
      }
      if (stepped) {
        prev = res;
        continue;
      }

      if (res > prev) alpha = std::max(0.5 * alpha, kDampingFloor);
      prev = res;
      h += alpha * (hh - h);
      k = sys.k_of(h);
      hh = sys.h_of(k);
    }
    p.h = h;
    p.k = k;
    if (!p.converged) {
      std::ostringstream msg;
      msg << "no convergence in " << options.max_iter << " iterations (residual " << p.residual
          << ")";
      p.failure = msg.str();
      return p;
    }
    if (!admissible(h, k, z, bounds)) {
      p.converged = false;
      p.failure = "solution violates the sign constraints";
      return p;
    }
    const cplx f_direct = nu_R.resolvent_moment(0, 1, k / options.c, -z);
    const cplx f_hk = (-1.0 + h * k / options.c) / z;
    const double scale = std::max({1.0, std::abs(f_direct),
                                   std::abs(k) * (1.0 + std::abs(h) + std::abs(k)) /
                                       (options.c * std::abs(z))});
    p.f = f_direct;
    if (std::abs(f_hk - f_direct) > 10.0 * options.tol * scale) {
      p.converged = false;
      p.failure = "f cross-check failed";
    }
  } catch (const DomainError& e) {
    p.converged = false;
    p.failure = e.what();
  }
  return p;
}

std::size_t HkSolution::failed() const {
  return static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const HkPoint& p) { return !p.converged; }));
}

void HkSolution::write_csv(std::ostream& out) const {
  out << "lambda,eps,re_h,im_h,re_k,im_k,re_f,im_f,residual,iterations\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const HkPoint& p = points[i];
    out << fmt_g17(lambda[i]) << ',' << fmt_g17(eps[i]) << ',' << fmt_g17(p.h.real()) << ','
        << fmt_g17(p.h.imag()) << ',' << fmt_g17(p.k.real()) << ',' << fmt_g17(p.k.imag()) << ','
        << fmt_g17(p.f.real()) << ',' << fmt_g17(p.f.imag()) << ',' << fmt_g17(p.residual) << ','
        << p.iterations << '\n';
  }
}

double diamond_support_bound(const SpectralMeasure& nu_K, const SpectralMeasure& nu_R, double c) {
  const double w = 1.0 + 1.0 / std::sqrt(c);
  return nu_K.support_max() * nu_R.support_max() * w * w;
}

std::vector<double> diamond_lambda_grid(const SupportSketch& sketch, double bound, int points) {
  if (points < 40) throw ConfigError("lambda grid needs at least 40 points");
  double edge = sketch.upper_edge();
  if (!(edge > 0.0)) edge = bound > 0.0 ? bound : 1.0;
  const double top = std::max(bound, 1.3 * edge);
  const double floor = 1e-12 * edge;
  const double a = 0.1 * edge;
  const double e1 = 1.15 * edge;
  // Geometric grading toward 0 for a singular density, or toward a lower
  // edge that sits close to 0.
  const double first = sketch.edges.empty() ? edge : sketch.edges.front();
  double lo = floor;
  int n_geo = points / 4;
  if (!sketch.singular_at_zero) {
    if (first < a) {
      lo = std::max(floor, 0.1 * first);
    } else {
      n_geo = points / 40;
    }
  }
  const int n_tail = points / 10;
  const int n_edges = 3 * points / 10;
  const int n_bulk = points - n_geo - n_tail - n_edges;

  std::vector<double> g;
  g.reserve(points + 16);
  for (int i = 0; i < n_geo; ++i) g.push_back(lo * std::pow(a / lo, static_cast<double>(i) / n_geo));
  for (int i = 0; i < n_bulk; ++i) g.push_back(a + (e1 - a) * i / n_bulk);
  // Quadratic clustering toward each edge from both sides.
  std::vector<double> edges = sketch.edges;
  std::vector<double> spacing = sketch.spacing;
  if (edges.empty()) {
    edges.push_back(edge);
    spacing.push_back(0.0);
  }
  const int per_edge = std::max(8, n_edges / static_cast<int>(edges.size()));
  for (std::size_t j = 0; j < edges.size(); ++j) {
    const double e = edges[j];
    const double half = std::max(0.15 * e, 3.0 * (j < spacing.size() ? spacing[j] : 0.0));
    for (int i = 0; i <= per_edge; ++i) {
      const double u = -1.0 + 2.0 * i / per_edge;
      const double x = e + half * (u < 0.0 ? -u * u : u * u);
      if (x > floor) g.push_back(x);
    }
  }
  for (int i = 0; i <= n_tail; ++i) g.push_back(e1 + (top - e1) * i / std::max(1, n_tail));
  std::sort(g.begin(), g.end());
  std::vector<double> out;
  out.reserve(g.size());
  for (double x : g) {
    if (out.empty() || x - out.back() > 1e-12 * x) out.push_back(x);
  }
  return out;
}

namespace {

class Sweeper {
public:
  Sweeper(const SpectralMeasure& nu_K, const SpectralMeasure& nu_R, const HkOptions& options,
          double bound)
      : K_(nu_K), R_(nu_R), options_(options), bound_(bound > 0.0 ? bound : 1.0) {}

  HkPoint solve(cplx z, const HkPoint* warm) {
    if (warm && warm->converged) {
      HkPoint p = solve_hk(R_, K_, ComplexGridPoint(z), options_, std::make_pair(warm->h, warm->k));
      if (p.converged) return p;
    }
    // Near the axis the default start converges slowly and can settle on a
    // root that satisfies the sign constraints only pointwise; continuation
    // from large Im z stays on the admissible branch.
    if (z.imag() != 0.0) {
      HkPoint p = descend(z, HkPoint{});
      if (p.converged) return p;
    }
    HkPoint p = solve_hk(R_, K_, ComplexGridPoint(z), options_);
    if (p.converged || z.imag() == 0.0) return p;
    return descend(z, p);
  }

private:
  // Continuation from large Im z down to the target.
  HkPoint descend(cplx z, HkPoint fallback) {
    if (fallback.failure.empty() && !fallback.converged) fallback.failure = "continuation failed";
    const double target = std::abs(z.imag());
    const double sign = z.imag() > 0.0 ? 1.0 : -1.0;
    double y = std::max(bound_, 10.0 * target);
    HkPoint cur = solve_hk(R_, K_, ComplexGridPoint(cplx(z.real(), sign * y)), options_);
    int total = cur.iterations;
    while (cur.converged && y > target) {
      y = std::max(0.5 * y, target);
      cur = solve_hk(R_, K_, ComplexGridPoint(cplx(z.real(), sign * y)), options_,
                     std::make_pair(cur.h, cur.k));
      total += cur.iterations;
    }
    if (!cur.converged) return fallback;
    cur.iterations = total;
    return cur;
  }

  const SpectralMeasure& K_;
  const SpectralMeasure& R_;
  HkOptions options_;
  double bound_;
};

// Crossings of 1 % of the peak (taken away from 0, where the density may be
// singular) by the density at eps = min(1e-6 bound, 1e-3 lambda), sampled uniformly on
// (0, 1.02 bound] and geometrically toward 1e-8 bound.
SupportSketch sketch_support(Sweeper& sweeper, double bound) {
  SupportSketch sk;
  if (!(bound > 0.0)) return sk;
  constexpr int kUniform = 400;
  constexpr int kGeometric = 100;
  const double eps = 1e-6 * bound;
  const double step = 1.02 * bound / kUniform;
  std::vector<double> lambda;
  for (int i = 0; i < kGeometric; ++i) {
    lambda.push_back(1e-8 * bound * std::pow(step / (1e-8 * bound), static_cast<double>(i) / kGeometric));
  }
  for (int i = 1; i <= kUniform; ++i) lambda.push_back(step * i);
  const int n = static_cast<int>(lambda.size());

  // An atom at 0 adds the Lorentzian m0 eps / (pi (lambda^2 + eps^2)), which
  // would hide a gap above 0; it is removed before looking for edges.
  const double probe = 1e-10 * bound;
  const HkPoint at_zero = sweeper.solve(cplx(0.0, probe), nullptr);
  const double m0 = at_zero.converged ? std::clamp(probe * at_zero.f.imag(), 0.0, 1.0) : 0.0;
  std::vector<double> rho(n, 0.0);
  double peak = 0.0;
  HkPoint prev;
  bool have_prev = false;
  for (int i = n - 1; i >= 0; --i) {
    const double e = std::min(eps, 1e-3 * lambda[i]);
    HkPoint p = sweeper.solve(cplx(lambda[i], e), have_prev ? &prev : nullptr);
    if (p.converged) {
      const double atom = m0 * e / (lambda[i] * lambda[i] + e * e);
      rho[i] = (p.f.imag() - atom) / std::numbers::pi;
      if (lambda[i] >= 0.05 * bound) peak = std::max(peak, rho[i]);
      prev = p;
      have_prev = true;
    }
  }
  if (!(peak > 0.0)) {
    sk.edges.push_back(bound);
    sk.spacing.push_back(step);
    return sk;
  }
  const double thr = 1e-2 * peak;
  sk.singular_at_zero = rho.front() > thr;
  for (int i = 0; i + 1 < n; ++i) {
    if ((rho[i] > thr) != (rho[i + 1] > thr)) {
      const double t = (thr - rho[i]) / (rho[i + 1] - rho[i]);
      sk.edges.push_back(lambda[i] + t * (lambda[i + 1] - lambda[i]));
      sk.spacing.push_back(lambda[i + 1] - lambda[i]);
    }
  }
  if (sk.edges.empty()) {
    sk.edges.push_back(bound);
    sk.spacing.push_back(step);
  }
  constexpr std::size_t kMaxEdges = 8;
  if (sk.edges.size() > kMaxEdges) {
    sk.edges.erase(sk.edges.begin(), sk.edges.end() - kMaxEdges);
    sk.spacing.erase(sk.spacing.begin(), sk.spacing.end() - kMaxEdges);
  }
  return sk;
}

}  // namespace

DiamondResult diamond(const SpectralMeasure& nu_K, const SpectralMeasure& nu_R,
                      const DiamondOptions& options) {
  const double c = options.solver.c;
  if (!(c > 0.0)) throw ConfigError("width ratio c must be positive");
  const double bound = diamond_support_bound(nu_K, nu_R, c);
  Sweeper sweeper(nu_K, nu_R, options.solver, bound);

  DiamondResult result{SpectralMeasure::point_mass(0.0), {}, {}, {}};
  std::vector<double> grid = options.lambda_grid;
  if (grid.empty()) {
    result.sketch = sketch_support(sweeper, bound);
    grid = diamond_lambda_grid(result.sketch, bound, options.grid_points);
  } else {
    result.sketch.edges = {grid.back()};
    result.sketch.spacing = {0.0};
  }
  StieltjesSamples samples = make_sample_layout(grid, options.eps_ladder);
  const std::size_t n = grid.size();
  const std::size_t levels = options.eps_ladder.size();

  std::vector<std::vector<HkPoint>> solved(n, std::vector<HkPoint>(levels));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t l = 0; l < levels; ++l) {
      const HkPoint* warm = l > 0 ? &solved[i][l - 1] : (i + 1 < n ? &solved[i + 1][0] : nullptr);
      solved[i][l] = sweeper.solve(cplx(grid[i], samples.eps[i][l]), warm);
    }
  }
  std::vector<HkPoint> probes(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    const HkPoint* warm = l > 0 ? &probes[l - 1] : nullptr;
    probes[l] = sweeper.solve(cplx(0.0, samples.zero_eps[l]), warm);
  }

  HkSolution& sol = result.solution;
  std::vector<std::string> failures;
  auto record = [&](double lambda, double eps, const HkPoint& p) {
    sol.lambda.push_back(lambda);
    sol.eps.push_back(eps);
    sol.points.push_back(p);
    if (!p.converged) {
      std::ostringstream msg;
      msg << "z = " << lambda << " + " << eps << "i: " << p.failure;
      failures.push_back(msg.str());
    }
  };
  for (std::size_t l = 0; l < levels; ++l) record(0.0, samples.zero_eps[l], probes[l]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t l = 0; l < levels; ++l) record(grid[i], samples.eps[i][l], solved[i][l]);
  }

  auto fail = [&](const std::string& what) {
    std::ostringstream msg;
    msg << what << "; " << failures.size() << " of " << sol.points.size() << " points failed";
    for (std::size_t i = 0; i < std::min<std::size_t>(failures.size(), 20); ++i) {
      msg << "\n  " << failures[i];
    }
    throw NumericalError(msg.str());
  };
  if (static_cast<double>(failures.size()) >
      options.max_failed_fraction * static_cast<double>(sol.points.size())) {
    fail("diamond: too many failed grid points");
  }
  for (const HkPoint& p : probes) {
    if (!p.converged) fail("diamond: a probe on the imaginary axis failed");
  }

  // The system describes the m-dimensional law; convert to n dimensions.
  auto convert = [c](cplx f, cplx z) { return c * f - (1.0 - c) / z; };
  StieltjesSamples usable;
  usable.zero_eps = samples.zero_eps;
  for (std::size_t l = 0; l < levels; ++l) {
    usable.zero_f.push_back(convert(probes[l].f, cplx(0.0, samples.zero_eps[l])));
  }
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = true;
    std::vector<cplx> row;
    for (std::size_t l = 0; l < levels; ++l) {
      ok = ok && solved[i][l].converged;
      row.push_back(convert(solved[i][l].f, cplx(grid[i], samples.eps[i][l])));
    }
    if (!ok) continue;
    usable.lambda.push_back(grid[i]);
    usable.eps.push_back(samples.eps[i]);
    usable.f.push_back(std::move(row));
  }
  InversionResult inv = invert_stieltjes(usable);
  result.measure = std::move(inv.measure);
  result.flagged = std::move(inv.flagged);
  return result;
}

void LayerCompositionPlan::validate() const {
  if (nu_K.empty()) throw ConfigError("composition plan needs at least one layer");
  if (!width_ratio.empty() && width_ratio.size() != nu_K.size()) {
    throw ConfigError("composition plan: one width ratio per layer");
  }
  for (double c : width_ratio) {
    if (!(c > 0.0)) throw ConfigError("composition plan: width ratios must be positive");
  }
}

std::vector<DiamondResult> compose_layers(const LayerCompositionPlan& plan,
                                          const DiamondOptions& options) {
  plan.validate();
  std::vector<DiamondResult> out;
  SpectralMeasure nu_R = SpectralMeasure::point_mass(1.0);
  for (int l = 0; l < plan.depth(); ++l) {
    DiamondOptions layer = options;
    layer.solver.c = plan.width_ratio.empty() ? 1.0 : plan.width_ratio[l];
    out.push_back(diamond(plan.nu_K[l], nu_R, layer));
    nu_R = out.back().measure;
  }
  return out;
}

}  // namespace jacspec
