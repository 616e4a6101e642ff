#include "jacspec/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "jacspec/activation.hpp"
#include "jacspec/errors.hpp"
#include "jacspec/format.hpp"
#include "jacspec/hk_solver.hpp"

namespace jacspec::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw ConfigError("out: cannot create directory '" + dir + "': " + ec.message());
  return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

json manifest_head(const char* command, const RunConfig& config) {
  return {{"tool", "jacspec"},
          {"version", kVersion},
          {"command", command},
          {"config", config.to_json()}};
}

json atoms_json(const SpectralMeasure& m) {
  json a = json::array();
  for (const Atom& atom : m.atoms()) a.push_back({{"loc", atom.loc}, {"mass", atom.mass}});
  return a;
}

double relative(double a, double b) {
  const double d = std::abs(a - b);
  return b != 0.0 ? d / std::abs(b) : d;
}

double dist_moment(const Distribution& d, int k) {
  return std::visit([k](const auto& x) { return x.moment(k); }, d);
}

double dist_edge(const Distribution& d) {
  return std::visit([](const auto& x) { return x.support_edge(); }, d);
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Distribution read_distribution(const std::string& path) {
  const std::string text = read_file(path);
  std::istringstream in(text);
  bool histogram = false;
  bool measure = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    histogram = line == "bin_left,bin_right,density";
    measure = line == "lambda,density";
    break;
  }
  in.clear();
  in.seekg(0);
  try {
    if (histogram) {
      EnsembleHistogram h = EnsembleHistogram::read_csv(in);
      double mass = 0.0;
      for (std::size_t j = 0; j < h.density.size(); ++j) {
        mass += h.density[j] * (h.edges[j + 1] - h.edges[j]);
      }
      if (std::abs(mass - 1.0) > 1e-6) {
        throw ConfigError("histogram is not normalized (mass " + fmt_g17(mass) + ")");
      }
      return h;
    }
    if (measure) {
      SpectralMeasure m = SpectralMeasure::read_csv(in);
      if (std::abs(m.total_mass() - 1.0) > SpectralMeasure::kMassTolerance) {
        throw ConfigError("density is not normalized (mass " + fmt_g17(m.total_mass()) + ")");
      }
      return m;
    }
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  throw ConfigError(path + ": header is neither bin_left,bin_right,density nor lambda,density");
}

double ComparisonReport::first_moment_delta() const {
  return relative(first_moment_sim, first_moment_theory);
}
double ComparisonReport::second_moment_delta() const {
  return relative(second_moment_sim, second_moment_theory);
}
double ComparisonReport::edge_delta() const { return relative(edge_sim, edge_theory); }

json ComparisonReport::to_json() const {
  return {{"sim", {{"path", sim_path}, {"digest", sim_digest}}},
          {"theory", {{"path", theory_path}, {"digest", theory_digest}}},
          {"sup_cdf", sup_cdf},
          {"first_moment", {{"sim", first_moment_sim}, {"theory", first_moment_theory},
                            {"relative_delta", first_moment_delta()}}},
          {"second_moment", {{"sim", second_moment_sim}, {"theory", second_moment_theory},
                             {"relative_delta", second_moment_delta()}}},
          {"edge", {{"sim", edge_sim}, {"theory", edge_theory}, {"relative_delta", edge_delta()}}},
          {"tolerances",
           {{"sup_cdf", tolerances.sup_cdf},
            {"edge_relative", tolerances.edge_relative},
            {"first_moment_relative", tolerances.first_moment_relative},
            {"second_moment_relative", tolerances.second_moment_relative}}},
          {"failures", failures},
          {"pass", pass()}};
}

std::string ComparisonReport::summary() const {
  std::ostringstream s;
  s << "sim     " << sim_path << " (" << sim_digest << ")\n";
  s << "theory  " << theory_path << " (" << theory_digest << ")\n";
  s << "sup-CDF distance  " << fmt_g17(sup_cdf) << " (tol " << tolerances.sup_cdf << ")\n";
  s << "first moment      " << fmt_g17(first_moment_sim) << " vs " << fmt_g17(first_moment_theory)
    << " rel " << first_moment_delta() << " (tol " << tolerances.first_moment_relative << ")\n";
  s << "second moment     " << fmt_g17(second_moment_sim) << " vs "
    << fmt_g17(second_moment_theory) << " rel " << second_moment_delta() << " (tol "
    << tolerances.second_moment_relative << ")\n";
  s << "edge              " << fmt_g17(edge_sim) << " vs " << fmt_g17(edge_theory) << " rel "
    << edge_delta() << " (tol " << tolerances.edge_relative << ")\n";
  s << (pass() ? "PASS" : "FAIL");
  for (const auto& f : failures) s << ' ' << f;
  s << '\n';
  return s.str();
}

ComparisonReport compare_distributions(const Distribution& sim, const Distribution& theory,
                                       const Tolerances& tolerances) {
  ComparisonReport r;
  r.tolerances = tolerances;
  r.sup_cdf = empirical_cdf_distance(sim, theory);
  r.first_moment_sim = dist_moment(sim, 1);
  r.first_moment_theory = dist_moment(theory, 1);
  r.second_moment_sim = dist_moment(sim, 2);
  r.second_moment_theory = dist_moment(theory, 2);
  r.edge_sim = dist_edge(sim);
  r.edge_theory = dist_edge(theory);
  if (!(r.sup_cdf < tolerances.sup_cdf)) r.failures.push_back("sup_cdf");
  if (!(r.first_moment_delta() < tolerances.first_moment_relative)) {
    r.failures.push_back("first_moment");
  }
  if (!(r.second_moment_delta() < tolerances.second_moment_relative)) {
    r.failures.push_back("second_moment");
  }
  if (!(r.edge_delta() < tolerances.edge_relative)) r.failures.push_back("edge");
  return r;
}

double input_q1(const NetworkConfig& network) {
  double ms = 1.0;
  if (const auto* x = std::get_if<std::vector<double>>(&network.input)) {
    ms = 0.0;
    for (double v : *x) ms += v * v;
    ms /= static_cast<double>(x->size());
  }
  return ms + network.sigma_b2();
}

int cmd_simulate(const RunConfig& config, int threads, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path out = prepare_out(config.out);
  const BinSpec bins = config.ensemble.bin_spec(config.network);
  const EnsembleRun run = run_ensemble(config.network, config.ensemble.samples, bins, threads);

  std::ostringstream csv;
  run.histogram.write_csv(csv);
  write_text(out / "histogram.csv", csv.str());

  json m = manifest_head("simulate", config);
  m["experimental"] = config.network.experimental;
  m["log_binned"] = run.histogram.log_binned;
  m["samples"] = config.ensemble.samples;
  m["accepted"] = run.accepted;
  m["rejected"] = run.rejected;
  m["diagnostics"] = run.diagnostics;
  m["lambda_max"] = run.histogram.lambda_max_observed;
  m["out_of_range"] = run.histogram.out_of_range;
  m["files"] = {{"histogram", {{"path", "histogram.csv"}, {"digest", fnv1a_hex(csv.str())}}}};
  m["wall_seconds"] = seconds_since(t0);
  write_text(out / "manifest.json", dump(m));

  log << "simulate: " << run.accepted << " samples, lambda_max " << fmt_g17(run.histogram.lambda_max_observed)
      << ", rejected " << run.rejected << (config.network.experimental ? " [experimental]" : "")
      << "\n";
  return kSuccess;
}

int cmd_solve(const RunConfig& config, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const NetworkConfig& net = config.network;
  const fs::path out = prepare_out(config.out);
  const double q1 = config.solver.q1.value_or(input_q1(net));
  const std::vector<double> q = q_sequence(q1, net.activation, net.bias, net.depth);

  LayerCompositionPlan plan;
  for (int l = 0; l < net.depth; ++l) {
    plan.nu_K.push_back(nu_K(q[l], net.activation, net.bias));
    plan.width_ratio.push_back(static_cast<double>(net.widths[l]) / net.widths[l + 1]);
  }
  DiamondOptions options = config.solver.diamond_options();
  const std::vector<DiamondResult> layers = compose_layers(plan, options);

  json m = manifest_head("solve", config);
  m["q"] = q;
  json files = json::object();
  json per_layer = json::array();
  for (int l = 0; l < net.depth; ++l) {
    const DiamondResult& r = layers[l];
    const std::string tag = "layer" + std::to_string(l + 1);
    std::ostringstream density;
    r.measure.write_csv(density);
    std::ostringstream hk;
    r.solution.write_csv(hk);
    std::ostringstream kernel;
    plan.nu_K[l].write_csv(kernel);
    write_text(out / ("density_" + tag + ".csv"), density.str());
    write_text(out / ("hk_" + tag + ".csv"), hk.str());
    write_text(out / ("nu_K_" + tag + ".csv"), kernel.str());
    per_layer.push_back({{"layer", l + 1},
                         {"q", q[l]},
                         {"width_ratio", plan.width_ratio[l]},
                         {"edge", r.measure.support_edge()},
                         {"mass", r.measure.total_mass()},
                         {"first_moment", r.measure.moment(1)},
                         {"atoms", atoms_json(r.measure)},
                         {"grid_points", r.measure.grid().size()},
                         {"flagged", r.flagged.size()},
                         {"failed_points", r.solution.failed()},
                         {"density", {{"path", "density_" + tag + ".csv"},
                                      {"digest", fnv1a_hex(density.str())}}},
                         {"hk", {{"path", "hk_" + tag + ".csv"}, {"digest", fnv1a_hex(hk.str())}}},
                         {"nu_K", {{"path", "nu_K_" + tag + ".csv"},
                                   {"digest", fnv1a_hex(kernel.str())}}}});
    if (l + 1 == net.depth) {
      write_text(out / "density.csv", density.str());
      files["density"] = {{"path", "density.csv"}, {"digest", fnv1a_hex(density.str())}};
    }
  }
  m["layers"] = per_layer;
  m["files"] = files;
  m["wall_seconds"] = seconds_since(t0);
  write_text(out / "manifest.json", dump(m));

  log << "solve: L=" << net.depth << " edge " << fmt_g17(layers.back().measure.support_edge())
      << ", q =";
  for (double v : q) log << ' ' << fmt_g17(v);
  log << "\n";
  return kSuccess;
}

int cmd_compare(const RunConfig& config, std::ostream& log) {
  if (config.compare.sim.empty()) throw ConfigError("compare.sim: path required");
  if (config.compare.theory.empty()) throw ConfigError("compare.theory: path required");
  const Distribution sim = read_distribution(config.compare.sim);
  const Distribution theory = read_distribution(config.compare.theory);
  ComparisonReport r = compare_distributions(sim, theory, config.compare.tolerances);
  r.sim_path = config.compare.sim;
  r.theory_path = config.compare.theory;
  r.sim_digest = fnv1a_hex(read_file(config.compare.sim));
  r.theory_digest = fnv1a_hex(read_file(config.compare.theory));

  const fs::path out = prepare_out(config.out);
  json j = r.to_json();
  j["tool"] = "jacspec";
  j["version"] = kVersion;
  write_text(out / "comparison.json", dump(j));
  write_text(out / "comparison.txt", r.summary());
  log << r.summary();
  return r.pass() ? kSuccess : kToleranceFail;
}

int cmd_universality(const RunConfig& config, int threads, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& laws = config.universality.laws;
  if (laws.size() < 2) throw ConfigError("universality.laws: at least two laws required");
  for (std::size_t i = 0; i < laws.size(); ++i) {
    if (laws[i] == EntryLaw::cauchy) {
      throw ConfigError("universality.laws[" + std::to_string(i) +
                        "]: cauchy has no finite moments; use simulate with experimental");
    }
  }
  const fs::path out = prepare_out(config.out);
  std::vector<EnsembleHistogram> hists;
  json files = json::array();
  for (std::size_t i = 0; i < laws.size(); ++i) {
    NetworkConfig net = config.network;
    net.weight_law = laws[i];
    const EnsembleRun run = run_ensemble(net, config.ensemble.samples,
                                         config.ensemble.bin_spec(net), threads);
    std::ostringstream csv;
    run.histogram.write_csv(csv);
    const std::string name = "histogram_" + std::to_string(i) + "_" + to_string(laws[i]) + ".csv";
    write_text(out / name, csv.str());
    files.push_back({{"law", to_string(laws[i])},
                     {"path", name},
                     {"digest", fnv1a_hex(csv.str())},
                     {"lambda_max", run.histogram.lambda_max_observed},
                     {"rejected", run.rejected}});
    hists.push_back(run.histogram);
  }
  json pairs = json::array();
  bool pass = true;
  for (std::size_t i = 0; i < laws.size(); ++i) {
    for (std::size_t j = i + 1; j < laws.size(); ++j) {
      const double d = empirical_cdf_distance(hists[i], hists[j]);
      const bool ok = d < config.universality.tolerance;
      pass = pass && ok;
      pairs.push_back({{"a", to_string(laws[i])}, {"b", to_string(laws[j])},
                       {"sup_cdf", d}, {"pass", ok}});
      log << to_string(laws[i]) << " vs " << to_string(laws[j]) << ": sup-CDF " << fmt_g17(d)
          << (ok ? " pass" : " FAIL") << "\n";
    }
  }
  json m = manifest_head("universality", config);
  m["tolerance"] = config.universality.tolerance;
  m["histograms"] = files;
  m["pairs"] = pairs;
  m["pass"] = pass;
  m["wall_seconds"] = seconds_since(t0);
  write_text(out / "universality.json", dump(m));
  return pass ? kSuccess : kToleranceFail;
}

int cmd_q_fixed_point(const RunConfig& config, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  const NetworkConfig& net = config.network;
  const double q = find_q_fixed_point(net.activation, net.bias);
  const double residual = std::abs(q_step(q, net.activation, net.bias) - q);
  const fs::path out = prepare_out(config.out);
  json m = manifest_head("q-fixed-point", config);
  m["q_star"] = q;
  m["residual"] = residual;
  m["wall_seconds"] = seconds_since(t0);
  write_text(out / "q_fixed_point.json", dump(m));
  log << "q* = " << fmt_g17(q) << " (residual " << residual << ")\n";
  return kSuccess;
}

}  // namespace jacspec::cli
