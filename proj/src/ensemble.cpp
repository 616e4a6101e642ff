#include "jacspec/ensemble.hpp"


#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "jacspec/format.hpp"

namespace jacspec {

EntryLaw parse_entry_law(const std::string& name) {
  if (name == "gaussian") return EntryLaw::gaussian;
  if (name == "rademacher") return EntryLaw::rademacher;
  if (name == "uniform") return EntryLaw::uniform;
  if (name == "cauchy") return EntryLaw::cauchy;
  throw ConfigError("unknown entry law '" + name + "'");
}

std::string to_string(EntryLaw law) {
  switch (law) {
    case EntryLaw::gaussian: return "gaussian";
    case EntryLaw::rademacher: return "rademacher";
    case EntryLaw::uniform: return "uniform";
    case EntryLaw::cauchy: return "cauchy";
  }
  return "?";
}

NetworkConfig NetworkConfig::square(int depth, int n, Activation activation) {
  NetworkConfig c;
  c.depth = depth;
  c.widths.assign(depth + 1, n);
  c.activation = activation;
  return c;
}

void NetworkConfig::validate() const {
  if (depth < 1) throw ConfigError("depth L must be at least 1");
  if (static_cast<int>(widths.size()) != depth + 1) {
    throw ConfigError("widths must list n_0..n_L (" + std::to_string(depth + 1) + " values)");
  }
  for (int w : widths) {
    if (w < 1) throw ConfigError("every width must be at least 1");
  }
  if (weight_law == EntryLaw::cauchy && !experimental) {
    throw ConfigError("cauchy weights violate the moment conditions; set experimental");
  }
  if (activation.experimental() && !experimental) {
    throw ConfigError("activation '" + activation.name() + "' is unbounded; set experimental");
  }
  if (const auto* iid = std::get_if<IidInput>(&input)) {
    if (iid->law == EntryLaw::cauchy) throw ConfigError("input law needs a finite fourth moment");
  } else {
    const auto& x = std::get<std::vector<double>>(input);
    if (static_cast<int>(x.size()) != widths.front()) {
      throw ConfigError("explicit input length must equal n_0");
    }
    for (double v : x) {
      if (!std::isfinite(v)) throw ConfigError("explicit input must be finite");
    }
  }
}

nlohmann::json NetworkConfig::to_json() const {
  nlohmann::json bias_json;
  switch (bias.kind()) {
    case BiasLaw::Kind::zero: bias_json = {{"law", "zero"}}; break;
    case BiasLaw::Kind::gaussian: bias_json = {{"law", "gaussian"}, {"sigma2", bias.variance()}}; break;
    case BiasLaw::Kind::discrete:
      bias_json = {{"law", "discrete"}, {"points", bias.points()}, {"masses", bias.masses()}};
      break;
  }
  nlohmann::json input_json;
  if (const auto* iid = std::get_if<IidInput>(&input)) {
    input_json = {{"law", to_string(iid->law)}};
  } else {
    input_json = {{"values", std::get<std::vector<double>>(input)}};
  }
  return {{"depth", depth},           {"widths", widths},
          {"activation", activation.name()}, {"weight_law", to_string(weight_law)},
          {"bias", bias_json},        {"input", input_json},
          {"seed", seed},             {"experimental", experimental}};
}

namespace {

double draw(EntryLaw law, PhiloxStream& s) {
  switch (law) {
    case EntryLaw::gaussian: return s.normal();
    case EntryLaw::rademacher: return s.rademacher();
    case EntryLaw::uniform: return s.uniform_unit_variance();
    case EntryLaw::cauchy: return s.cauchy(1.0);
  }
  return 0.0;
}

double draw_bias(const NetworkConfig& c, int rows, PhiloxStream& s) {
  if (c.weight_law == EntryLaw::cauchy) return s.cauchy(1.0 / rows);
  switch (c.bias.kind()) {
    case BiasLaw::Kind::zero: return 0.0;
    case BiasLaw::Kind::gaussian: return std::sqrt(c.bias.variance()) * s.normal();
    case BiasLaw::Kind::discrete: {
      const double u = s.uniform();
      double acc = 0.0;
      const auto& m = c.bias.masses();
      for (std::size_t i = 0; i < m.size(); ++i) {
        acc += m[i];
        if (u < acc) return c.bias.points()[i];
      }
      return c.bias.points().back();
    }
  }
  return 0.0;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

ForwardPass forward_pass(const NetworkConfig& config, PhiloxStream& stream) {
  config.validate();
  ForwardPass pass;
  const int n0 = config.widths.front();
  Eigen::VectorXd x0(n0);
  if (const auto* iid = std::get_if<IidInput>(&config.input)) {
    for (int i = 0; i < n0; ++i) x0[i] = draw(iid->law, stream);
    const double ms = x0.squaredNorm() / n0;
    if (ms > 0.0) x0 /= std::sqrt(ms);
  } else {
    const auto& values = std::get<std::vector<double>>(config.input);
    for (int i = 0; i < n0; ++i) x0[i] = values[i];
  }
  pass.x.push_back(std::move(x0));

  for (int l = 1; l <= config.depth; ++l) {
    const int cols = config.widths[l - 1];
    const int rows = config.widths[l];
    Eigen::MatrixXd w(rows, cols);
    if (config.weight_law == EntryLaw::cauchy) {
      const double scale = 1.0 / cols;
      for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = stream.cauchy(scale);
      }
    } else {
      const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
      for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = scale * draw(config.weight_law, stream);
      }
    }
    Eigen::VectorXd b(rows);
    for (int i = 0; i < rows; ++i) b[i] = draw_bias(config, rows, stream);

    Eigen::VectorXd y = w * pass.x.back() + b;
    Eigen::VectorXd x(rows);
    Eigen::VectorXd d(rows);
    for (int i = 0; i < rows; ++i) {
      x[i] = config.activation.value(y[i]);
      d[i] = config.activation.derivative(y[i]);
    }
    if (!all_finite(y) || !all_finite(x) || !all_finite(d)) {
      throw SampleRejected("layer " + std::to_string(l) + ": non-finite activation value");
    }
    pass.weights.push_back(std::move(w));
    pass.biases.push_back(std::move(b));
    pass.y.push_back(std::move(y));
    pass.x.push_back(std::move(x));
    pass.d.push_back(std::move(d));
  }
  return pass;
}

Eigen::MatrixXd jacobian(const ForwardPass& pass) {
  Eigen::MatrixXd j = pass.d.front().asDiagonal() * pass.weights.front();
  for (std::size_t l = 1; l < pass.weights.size(); ++l) {
    Eigen::MatrixXd next = pass.weights[l] * j;
    j = pass.d[l].asDiagonal() * next;
  }
  return j;
}

std::vector<double> jacobian_singular_values(const NetworkConfig& config, PhiloxStream& stream) {
  const ForwardPass pass = forward_pass(config, stream);
  Eigen::MatrixXd j = jacobian(pass);
  if (!j.allFinite()) throw SampleRejected("non-finite Jacobian entries");
  const Eigen::Index rows = j.rows();
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(j);
  if (svd.info() != Eigen::Success) throw SampleRejected("SVD did not converge");
  std::vector<double> s(svd.singularValues().data(),
                        svd.singularValues().data() + svd.singularValues().size());
  // sum s_i^2 = |J|_F^2 guards against a faulty backend.
  double energy = 0.0;
  for (double v : s) energy += v * v;
  const double frobenius = j.squaredNorm();
  if (std::abs(energy - frobenius) > 1e-8 * std::max(frobenius, 1e-300)) {
    throw SampleRejected("SVD trace check failed: sum s^2 = " + std::to_string(energy) +
                         ", |J|_F^2 = " + std::to_string(frobenius));
  }
  std::sort(s.begin(), s.end(), std::greater<>());
  s.resize(rows, 0.0);
  return s;
}

std::vector<double> squared_singular_values(const std::vector<double>& singular) {
  std::vector<double> e;
  e.reserve(singular.size());
  double top = 0.0;
  for (double v : singular) top = std::max(top, v * v);
  for (double v : singular) {
    double sq = v * v;
    if (sq < -1e-10 * top) throw NumericalError("negative eigenvalue beyond round-off");
    e.push_back(std::max(sq, 0.0));
  }
  std::sort(e.begin(), e.end());
  return e;
}

double EnsembleHistogram::cdf(double x) const {
  if (edges.empty() || x <= edges.front()) return 0.0;
  double c = 0.0;
  for (std::size_t j = 0; j < density.size(); ++j) {
    const double a = edges[j];
    const double b = edges[j + 1];
    if (x >= b) {
      c += density[j] * (b - a);
    } else {
      c += density[j] * (x - a);
      break;
    }
  }
  return std::min(c, 1.0);
}

double EnsembleHistogram::moment(int k) const {
  double m = 0.0;
  for (std::size_t j = 0; j < density.size(); ++j) {
    m += density[j] * (std::pow(edges[j + 1], k + 1) - std::pow(edges[j], k + 1)) / (k + 1);
  }
  return m;
}

double EnsembleHistogram::support_edge() const {
  for (std::size_t j = density.size(); j-- > 0;) {
    if (density[j] > 0.0) return edges[j + 1];
  }
  return edges.empty() ? 0.0 : edges.front();
}

void EnsembleHistogram::write_csv(std::ostream& out) const {
  out << "# samples," << samples << '\n';
  out << "# lambda_max," << fmt_g17(lambda_max_observed) << '\n';
  out << "# log_binned," << (log_binned ? 1 : 0) << '\n';
  out << "bin_left,bin_right,density\n";
  for (std::size_t j = 0; j < density.size(); ++j) {
    out << fmt_g17(edges[j]) << ',' << fmt_g17(edges[j + 1]) << ',' << fmt_g17(density[j]) << '\n';
  }
}

EnsembleHistogram EnsembleHistogram::read_csv(std::istream& in) {
  EnsembleHistogram h;
  h.samples = 1;
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      unsigned long long n = 0;
      double v = 0.0;
      int flag = 0;
      if (std::sscanf(line.c_str(), "# samples,%llu", &n) == 1) h.samples = n;
      if (std::sscanf(line.c_str(), "# lambda_max,%lf", &v) == 1) h.lambda_max_observed = v;
      if (std::sscanf(line.c_str(), "# log_binned,%d", &flag) == 1) h.log_binned = flag != 0;
      continue;
    }
    if (!header) {
      if (line != "bin_left,bin_right,density") {
        throw ConfigError("line " + std::to_string(lineno) + ": expected header bin_left,bin_right,density");
      }
      header = true;
      continue;
    }
    double a = 0.0, b = 0.0, d = 0.0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &d) != 3) {
      throw ConfigError("line " + std::to_string(lineno) + ": malformed histogram row");
    }
    if (h.edges.empty()) {
      h.edges.push_back(a);
    } else if (a != h.edges.back()) {
      throw ConfigError("line " + std::to_string(lineno) + ": bins are not contiguous");
    }
    if (!(b > a) || d < 0.0 || !std::isfinite(d)) {
      throw ConfigError("line " + std::to_string(lineno) + ": invalid bin");
    }
    h.edges.push_back(b);
    h.density.push_back(d);
  }
  if (!header || h.density.empty()) throw ConfigError("histogram file has no bins");
  return h;
}

EnsembleHistogram make_histogram(const std::vector<double>& values, const BinSpec& spec,
                                 std::uint64_t samples) {
  if (values.empty()) throw NumericalError("no eigenvalues to bin");
  if (spec.bins < 1) throw ConfigError("bins must be positive");
  EnsembleHistogram h;
  h.samples = samples;
  h.log_binned = spec.log_binned;
  h.lambda_max_observed = *std::max_element(values.begin(), values.end());
  const double vmax = h.lambda_max_observed;
  double lo = 0.0;
  double hi = 0.0;
  if (spec.log_binned) {
    lo = spec.lo.value_or(1e-4);
    hi = spec.hi.value_or(vmax);
    if (!(lo > 0.0)) throw ConfigError("log bins need a positive lower end");
    if (!(hi > lo)) hi = 10.0 * lo;
  } else {
    lo = spec.lo.value_or(0.0);
    hi = spec.hi.value_or(vmax > 0.0 ? 1.05 * vmax : 1.0);
    if (!(hi > lo)) hi = lo + 1.0;
  }
  const int nb = spec.bins;
  h.edges.resize(nb + 1);
  for (int j = 0; j <= nb; ++j) {
    const double t = static_cast<double>(j) / nb;
    h.edges[j] = spec.log_binned ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  }
  h.edges.front() = lo;
  h.edges.back() = hi;
  std::vector<std::uint64_t> counts(nb, 0);
  std::uint64_t inside = 0;
  for (double v : values) {
    if (v < lo || v > hi) {
      ++h.out_of_range;
      continue;
    }
    const double t = spec.log_binned ? std::log(v / lo) / std::log(hi / lo) : (v - lo) / (hi - lo);
    int j = static_cast<int>(t * nb);
    j = std::clamp(j, 0, nb - 1);
    // Guard against rounding at bin boundaries.
    while (j > 0 && v < h.edges[j]) --j;
    while (j + 1 < nb && v >= h.edges[j + 1]) ++j;
    ++counts[j];
    ++inside;
  }
  if (inside == 0) throw NumericalError("no eigenvalue falls inside the binned range");
  h.density.resize(nb);
  for (int j = 0; j < nb; ++j) {
    h.density[j] = static_cast<double>(counts[j]) / (static_cast<double>(inside) * (h.edges[j + 1] - h.edges[j]));
  }
  return h;
}

EnsembleRun run_ensemble(const NetworkConfig& config, std::uint64_t samples, const BinSpec& bins,
                         int threads) {
  config.validate();
  if (samples < 1) throw ConfigError("sample count N must be at least 1");
  const auto start = std::chrono::steady_clock::now();

  std::vector<std::vector<double>> per_sample(samples);
  std::vector<std::string> failure(samples);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= samples) return;
      try {
        PhiloxStream stream(config.seed, i);
        per_sample[i] = squared_singular_values(jacobian_singular_values(config, stream));
      } catch (const SampleRejected& e) {
        failure[i] = "sample " + std::to_string(i) + ": " + e.what();
      }
    }
  };
  const int nthreads = std::max(1, std::min<int>(threads, static_cast<int>(samples)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  EnsembleRun run;
  for (std::uint64_t i = 0; i < samples; ++i) {
    if (!failure[i].empty()) {
      ++run.rejected;
      run.diagnostics.push_back(failure[i]);
    } else {
      ++run.accepted;
      run.eigenvalues.insert(run.eigenvalues.end(), per_sample[i].begin(), per_sample[i].end());
    }
  }
  if (run.accepted == 0) throw NumericalError("all samples were rejected");
  if (static_cast<double>(run.rejected) > 1e-3 * static_cast<double>(samples)) {
    std::ostringstream msg;
    msg << run.rejected << " of " << samples << " samples rejected (limit 0.1 %)";
    if (!run.diagnostics.empty()) msg << "; first: " << run.diagnostics.front();
    throw NumericalError(msg.str());
  }
  run.histogram = make_histogram(run.eigenvalues, bins, run.accepted);
  run.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

namespace {

double cdf_of(const Distribution& d, double x) {
  return std::visit([x](const auto& v) { return v.cdf(x); }, d);
}

double cdf_left_of(const Distribution& d, double x) {
  if (const auto* m = std::get_if<SpectralMeasure>(&d)) return m->cdf_left(x);
  return std::get<EnsembleHistogram>(d).cdf(x);
}

}  // namespace

double empirical_cdf_distance(const Distribution& a, const Distribution& b) {
  std::vector<const EnsembleHistogram*> hists;
  for (const Distribution* d : {&a, &b}) {
    if (const auto* h = std::get_if<EnsembleHistogram>(d)) hists.push_back(h);
  }
  auto covered = [&](double x) {
    for (const EnsembleHistogram* h : hists) {
      if (x >= h->edges.front() && x <= h->edges.back()) return true;
    }
    return false;
  };
  // Histogram edges carry the mass strictly below them, so they are compared
  // against left limits only. Measure breakpoints count on both sides unless
  // a histogram covers them.
  std::set<double> left_only;
  std::set<double> both_sides;
  for (const EnsembleHistogram* h : hists) left_only.insert(h->edges.begin(), h->edges.end());
  for (const Distribution* d : {&a, &b}) {
    if (const auto* m = std::get_if<SpectralMeasure>(d)) {
      for (const Atom& at : m->atoms()) {
        if (!covered(at.loc)) both_sides.insert(at.loc);
      }
      for (double x : m->grid()) {
        if (!covered(x)) both_sides.insert(x);
      }
    }
  }
  double sup = 0.0;
  for (double x : left_only) {
    sup = std::max(sup, std::abs(cdf_left_of(a, x) - cdf_left_of(b, x)));
  }
  for (double x : both_sides) {
    sup = std::max(sup, std::abs(cdf_of(a, x) - cdf_of(b, x)));
    sup = std::max(sup, std::abs(cdf_left_of(a, x) - cdf_left_of(b, x)));
  }
  return sup;
}

}  // namespace jacspec
