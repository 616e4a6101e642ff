#include "jacspec/cli/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "jacspec/errors.hpp"

namespace jacspec::cli {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Object reader that rejects keys it was not asked about.
class Section {
public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "config" : path_, "expected an object");
  }

  /// Rejects keys that were never queried.
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) fail(join(path_, key), "unknown key");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string path(const std::string& key) const { return join(path_, key); }

  double number(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number()) fail(path(key), "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(path(key), "must be finite");
    return x;
  }
  std::int64_t integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_integer()) fail(path(key), "expected an integer");
    return v.get<std::int64_t>();
  }
  std::uint64_t unsigned_integer(const std::string& key) {
    const json& v = at(key);
    if (!v.is_number_unsigned()) fail(path(key), "expected a nonnegative integer");
    return v.get<std::uint64_t>();
  }
  bool boolean(const std::string& key) {
    const json& v = at(key);
    if (!v.is_boolean()) fail(path(key), "expected true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail(path(key), "expected a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) fail(path(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string p = path(key) + "[" + std::to_string(i) + "]";
      if (!v[i].is_number()) fail(p, "expected a number");
      out.push_back(v[i].get<double>());
      if (!std::isfinite(out.back())) fail(p, "must be finite");
    }
    return out;
  }
  std::vector<std::string> strings(const std::string& key) {
    const json& v = at(key);
    if (!v.is_array()) fail(path(key), "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_string()) fail(path(key) + "[" + std::to_string(i) + "]", "expected a string");
      out.push_back(v[i].get<std::string>());
    }
    return out;
  }

private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

int checked_int(Section& s, const std::string& key, std::int64_t min) {
  const std::int64_t v = s.integer(key);
  if (v < min || v > 1'000'000'000) {
    fail(s.path(key), "must be at least " + std::to_string(min));
  }
  return static_cast<int>(v);
}

template <typename F>
auto with_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
}

BiasLaw parse_bias(const json& j, const std::string& path) {
  Section s(j, path);
  const std::string law = s.has("law") ? s.string("law") : "gaussian";
  BiasLaw out = BiasLaw::zero();
  if (law == "gaussian") {
    const double v = s.has("sigma2") ? s.number("sigma2") : 0.0;
    out = with_path(s.path("sigma2"), [&] { return BiasLaw::gaussian(v); });
  } else if (law == "discrete") {
    if (!s.has("points")) fail(s.path("points"), "required for a discrete law");
    if (!s.has("masses")) fail(s.path("masses"), "required for a discrete law");
    auto points = s.numbers("points");
    auto masses = s.numbers("masses");
    out = with_path(path, [&] { return BiasLaw::discrete(points, masses); });
  } else if (law != "zero") {
    fail(s.path("law"), "unknown bias law '" + law + "'");
  }
  s.finish();
  return out;
}

NetworkConfig parse_network(const json& j, const std::string& path) {
  Section s(j, path);
  NetworkConfig c;
  if (s.has("depth")) c.depth = checked_int(s, "depth", 1);
  if (s.has("width") && s.has("widths")) fail(path, "give either width or widths");
  if (s.has("widths")) {
    const auto w = s.numbers("widths");
    c.widths.clear();
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] != std::floor(w[i]) || w[i] < 1 || w[i] > 1e9) {
        fail(s.path("widths") + "[" + std::to_string(i) + "]", "must be a positive integer");
      }
      c.widths.push_back(static_cast<int>(w[i]));
    }
  } else {
    const int n = s.has("width") ? checked_int(s, "width", 1) : 100;
    c.widths.assign(c.depth + 1, n);
  }
  if (s.has("activation")) {
    const std::string name = s.string("activation");
    c.activation = with_path(s.path("activation"), [&] { return Activation::parse(name); });
  }
  if (s.has("weight_law")) {
    const std::string name = s.string("weight_law");
    c.weight_law = with_path(s.path("weight_law"), [&] { return parse_entry_law(name); });
  }
  if (s.has("bias_sigma2") && s.has("bias")) fail(path, "give either bias_sigma2 or bias");
  if (s.has("bias_sigma2")) {
    const double v = s.number("bias_sigma2");
    c.bias = with_path(s.path("bias_sigma2"),
                       [&] { return v == 0.0 ? BiasLaw::zero() : BiasLaw::gaussian(v); });
  }
  if (s.has("bias")) c.bias = parse_bias(s.at("bias"), s.path("bias"));
  if (s.has("input")) {
    Section in(s.at("input"), s.path("input"));
    if (in.has("law") && in.has("values")) fail(s.path("input"), "give either law or values");
    if (in.has("values")) {
      c.input = in.numbers("values");
    } else if (in.has("law")) {
      const std::string name = in.string("law");
      c.input = IidInput{with_path(in.path("law"), [&] { return parse_entry_law(name); })};
    }
    in.finish();
  }
  if (s.has("experimental")) c.experimental = s.boolean("experimental");
  s.finish();
  with_path(path, [&] {
    c.validate();
    return 0;
  });
  return c;
}

json network_json(const NetworkConfig& c) {
  json j = c.to_json();
  j.erase("seed");
  return j;
}

}  // namespace

BinSpec EnsembleSection::bin_spec(const NetworkConfig& network) const {
  BinSpec b;
  b.bins = bins;
  b.log_binned = log_binned.value_or(network.weight_law == EntryLaw::cauchy);
  b.lo = lo;
  b.hi = hi;
  return b;
}

DiamondOptions SolverSection::diamond_options() const {
  DiamondOptions d;
  d.solver.tol = tol;
  d.solver.max_iter = max_iter;
  d.grid_points = grid_points;
  d.eps_ladder = eps_ladder;
  d.max_failed_fraction = max_failed_fraction;
  return d;
}

nlohmann::json RunConfig::to_json() const {
  json ens = {{"samples", ensemble.samples}, {"bins", ensemble.bins}};
  if (ensemble.log_binned) ens["log_binned"] = *ensemble.log_binned;
  if (ensemble.lo) ens["lo"] = *ensemble.lo;
  if (ensemble.hi) ens["hi"] = *ensemble.hi;
  json sol = {{"grid_points", solver.grid_points},
              {"tol", solver.tol},
              {"max_iter", solver.max_iter},
              {"eps_ladder", solver.eps_ladder},
              {"max_failed_fraction", solver.max_failed_fraction}};
  if (solver.q1) sol["q1"] = *solver.q1;
  json laws = json::array();
  for (EntryLaw l : universality.laws) laws.push_back(jacspec::to_string(l));
  return {{"seed", network.seed},
          {"out", out},
          {"network", network_json(network)},
          {"ensemble", ens},
          {"solver", sol},
          {"compare",
           {{"sim", compare.sim},
            {"theory", compare.theory},
            {"tolerances",
             {{"sup_cdf", compare.tolerances.sup_cdf},
              {"edge_relative", compare.tolerances.edge_relative},
              {"first_moment_relative", compare.tolerances.first_moment_relative},
              {"second_moment_relative", compare.tolerances.second_moment_relative}}}}},
          {"universality", {{"laws", laws}, {"tolerance", universality.tolerance}}}};
}

RunConfig parse_config(const nlohmann::json& j) {
  RunConfig c;
  Section top(j, "");
  if (top.has("network")) c.network = parse_network(top.at("network"), "network");
  if (top.has("seed")) c.network.seed = top.unsigned_integer("seed");
  if (top.has("out")) c.out = top.string("out");

  if (top.has("ensemble")) {
    Section s(top.at("ensemble"), "ensemble");
    if (s.has("samples")) {
      c.ensemble.samples = s.unsigned_integer("samples");
      if (c.ensemble.samples < 1) fail(s.path("samples"), "must be at least 1");
    }
    if (s.has("bins")) c.ensemble.bins = checked_int(s, "bins", 1);
    if (s.has("log_binned")) c.ensemble.log_binned = s.boolean("log_binned");
    if (s.has("lo")) c.ensemble.lo = s.number("lo");
    if (s.has("hi")) c.ensemble.hi = s.number("hi");
    if (c.ensemble.lo && c.ensemble.hi && !(*c.ensemble.hi > *c.ensemble.lo)) {
      fail(s.path("hi"), "must exceed lo");
    }
    s.finish();
  }

  if (top.has("solver")) {
    Section s(top.at("solver"), "solver");
    if (s.has("grid_points")) c.solver.grid_points = checked_int(s, "grid_points", 40);
    if (s.has("tol")) {
      c.solver.tol = s.number("tol");
      if (!(c.solver.tol > 0.0)) fail(s.path("tol"), "must be positive");
    }
    if (s.has("max_iter")) c.solver.max_iter = checked_int(s, "max_iter", 1);
    if (s.has("eps_ladder")) {
      c.solver.eps_ladder = s.numbers("eps_ladder");
      const auto& e = c.solver.eps_ladder;
      if (e.size() < 2) fail(s.path("eps_ladder"), "needs at least two levels");
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (!(e[i] > 0.0) || (i > 0 && !(e[i] < e[i - 1]))) {
          fail(s.path("eps_ladder"), "must be positive and strictly decreasing");
        }
      }
    }
    if (s.has("max_failed_fraction")) {
      c.solver.max_failed_fraction = s.number("max_failed_fraction");
      if (c.solver.max_failed_fraction < 0.0 || c.solver.max_failed_fraction > 1.0) {
        fail(s.path("max_failed_fraction"), "must lie in [0, 1]");
      }
    }
    if (s.has("q1")) c.solver.q1 = s.number("q1");
    s.finish();
  }

  if (top.has("compare")) {
    Section s(top.at("compare"), "compare");
    if (s.has("sim")) c.compare.sim = s.string("sim");
    if (s.has("theory")) c.compare.theory = s.string("theory");
    if (s.has("tolerances")) {
      Section t(s.at("tolerances"), s.path("tolerances"));
      auto read = [&](const char* key, double& dst) {
        if (!t.has(key)) return;
        dst = t.number(key);
        if (!(dst >= 0.0)) fail(t.path(key), "must be nonnegative");
      };
      read("sup_cdf", c.compare.tolerances.sup_cdf);
      read("edge_relative", c.compare.tolerances.edge_relative);
      read("first_moment_relative", c.compare.tolerances.first_moment_relative);
      read("second_moment_relative", c.compare.tolerances.second_moment_relative);
      t.finish();
    }
    s.finish();
  }

  if (top.has("universality")) {
    Section s(top.at("universality"), "universality");
    if (s.has("laws")) {
      const auto names = s.strings("laws");
      for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string p = s.path("laws") + "[" + std::to_string(i) + "]";
        c.universality.laws.push_back(with_path(p, [&] { return parse_entry_law(names[i]); }));
      }
    }
    if (s.has("tolerance")) {
      c.universality.tolerance = s.number("tolerance");
      if (!(c.universality.tolerance >= 0.0)) fail(s.path("tolerance"), "must be nonnegative");
    }
    s.finish();
  }
  top.finish();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < pos; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream msg;
    msg << path << ":" << line << ":" << col << ": syntax error";
    throw ConfigError(msg.str());
  }
  return parse_config(j);
}

}  // namespace jacspec::cli
