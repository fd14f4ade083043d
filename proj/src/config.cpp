#include "cogrelay/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace cogrelay {

namespace {

template <class T>
T scalar(const YAML::Node& node, const std::string& key) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(key + ": malformed value");
  }
}

template <class T>
std::vector<T> sequence(const YAML::Node& node, const std::string& key) {
  if (node.IsScalar()) return {scalar<T>(node, key)};
  if (!node.IsSequence()) throw ConfigError(key + ": expected a list");
  std::vector<T> out;
  for (const auto& item : node) out.push_back(scalar<T>(item, key));
  return out;
}

using Setter = std::function<void(SimConfig&, const YAML::Node&, const std::string&)>;

template <class T>
Setter set(T SimConfig::*field) {
  return [field](SimConfig& c, const YAML::Node& n, const std::string& key) {
    c.*field = scalar<T>(n, key);
  };
}

template <class T>
Setter set_list(std::vector<T> SimConfig::*field) {
  return [field](SimConfig& c, const YAML::Node& n, const std::string& key) {
    c.*field = sequence<T>(n, key);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"tau", set(&SimConfig::tau)},
      {"eta", set(&SimConfig::eta)},
      {"gamma_th_db", set(&SimConfig::gamma_th_db)},
      {"p_rs_dbm", set(&SimConfig::p_rs_dbm)},
      {"p_p1_dbm", set(&SimConfig::p_p1_dbm)},
      {"p_p2_dbm", set(&SimConfig::p_p2_dbm)},
      {"p_rp_dbm", set(&SimConfig::p_rp_dbm)},
      {"n_a", set(&SimConfig::n_a)},
      {"n_b", set(&SimConfig::n_b)},
      {"n_rs", set(&SimConfig::n_rs)},
      {"n_p1", set(&SimConfig::n_p1)},
      {"n_p2", set(&SimConfig::n_p2)},
      {"n_rp", set(&SimConfig::n_rp)},
      {"d", set(&SimConfig::d)},
      {"max_outer", set(&SimConfig::max_outer)},
      {"max_inner", set(&SimConfig::max_inner)},
      {"inner_tol", set(&SimConfig::inner_tol)},
      {"r_a_rs", set(&SimConfig::r_a_rs)},
      {"r_rs_b", set(&SimConfig::r_rs_b)},
      {"r_rs_rp", set(&SimConfig::r_rs_rp)},
      {"r_p1_rp", set(&SimConfig::r_p1_rp)},
      {"r_rp_p2", set(&SimConfig::r_rp_p2)},
      {"schemes", set_list(&SimConfig::schemes)},
      {"sweep_variable", set(&SimConfig::sweep_variable)},
      {"sweep_values", set_list(&SimConfig::sweep_values)},
      {"trials", set(&SimConfig::trials)},
      {"seed", set(&SimConfig::seed)},
      {"output", set(&SimConfig::output)},
  };
  return table;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::vector<double> stepped(int first, int last, int step, double scale) {
  std::vector<double> out;
  for (int k = first; k <= last; k += step) out.push_back(k / scale);
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::vector<std::string> SimConfig::default_schemes() {
  std::vector<std::string> out;
  for (const Scheme& s : Scheme::all()) out.push_back(s.name());
  return out;
}

Scenario SimConfig::scenario() const {
  Scenario s;
  SystemParameters& p = s.params;
  p.path_loss_exponent = tau;
  p.conversion_efficiency = eta;
  p.threshold_snr = db_to_linear(gamma_th_db);
  p.relay_power = dbm_to_linear(p_rs_dbm);
  p.primary_power_1 = dbm_to_linear(p_p1_dbm);
  p.primary_power_2 = dbm_to_linear(p_p2_dbm);
  p.primary_relay_power = dbm_to_linear(p_rp_dbm);
  p.antennas = {n_a, n_b, n_rs, n_p1, n_p2, n_rp};
  p.streams = d;
  p.max_outer_iters = max_outer;
  p.max_inner_iters = max_inner;
  p.inner_tolerance = inner_tol;
  s.base = {r_a_rs, r_rs_b, r_rs_rp, r_p1_rp, r_rp_p2};
  return s;
}

SweepSpec SimConfig::sweep_spec() const {
  SweepSpec spec{sweep_variable, sweep_values};
  if (spec.values.empty()) {
    if (sweep_variable == "gamma_th_db") spec.values = {gamma_th_db};
    else if (sweep_variable == "p_rs_dbm") spec.values = {p_rs_dbm};
    else if (sweep_variable == "n_su") spec.values = {static_cast<double>(n_a)};
    else if (sweep_variable == "r_a_rs") spec.values = {r_a_rs};
  }
  return spec;
}

std::vector<Scheme> SimConfig::scheme_list() const {
  std::vector<Scheme> out;
  for (const auto& name : schemes) out.push_back(Scheme::parse(name));
  return out;
}

void SimConfig::validate() const {
  const Scenario s = scenario();
  try {
    s.params.validate();
    derive_topology(s.base);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (schemes.empty()) throw ConfigError("schemes: at least one scheme required");
  scheme_list();
  if (!is_sweep_variable(sweep_variable))
    throw ConfigError("sweep_variable: unknown variable '" + sweep_variable + "'");
  const SweepSpec spec = sweep_spec();
  for (size_t k = 1; k < spec.values.size(); ++k) {
    if (!(spec.values[k] > spec.values[k - 1]))
      throw ConfigError("sweep_values: must be strictly increasing");
  }
  for (double v : spec.values) {
    try {
      const Scenario point = apply_sweep_value(s, spec.variable, v);
      point.params.validate();
      derive_topology(point.base);
    } catch (const ConfigError&) {
      throw;
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("sweep_values: ") + e.what());
    }
  }
  if (trials < 1) throw ConfigError("trials: must be >= 1");
  if (output.empty()) throw ConfigError("output: empty path");
}

SimConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("parse error: ") + e.what());
  }
  SimConfig config;
  if (!root.IsNull()) {
    if (!root.IsMap()) throw ConfigError("parse error: expected key-value pairs");
    const auto& table = setters();
    for (const auto& entry : root) {
      const auto key = entry.first.as<std::string>();
      const auto it = table.find(key);
      if (it == table.end()) throw ConfigError(key + ": unknown key");
      it->second(config, entry.second, key);
    }
  }
  config.validate();
  return config;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const SimConfig& c) {
  std::ostringstream os;
  const auto num = [&](const char* key, double v) { os << key << ": " << format_double(v) << '\n'; };
  const auto integer = [&](const char* key, auto v) { os << key << ": " << v << '\n'; };
  num("tau", c.tau);
  num("eta", c.eta);
  num("gamma_th_db", c.gamma_th_db);
  num("p_rs_dbm", c.p_rs_dbm);
  num("p_p1_dbm", c.p_p1_dbm);
  num("p_p2_dbm", c.p_p2_dbm);
  num("p_rp_dbm", c.p_rp_dbm);
  integer("n_a", c.n_a);
  integer("n_b", c.n_b);
  integer("n_rs", c.n_rs);
  integer("n_p1", c.n_p1);
  integer("n_p2", c.n_p2);
  integer("n_rp", c.n_rp);
  integer("d", c.d);
  integer("max_outer", c.max_outer);
  integer("max_inner", c.max_inner);
  num("inner_tol", c.inner_tol);
  num("r_a_rs", c.r_a_rs);
  num("r_rs_b", c.r_rs_b);
  num("r_rs_rp", c.r_rs_rp);
  num("r_p1_rp", c.r_p1_rp);
  num("r_rp_p2", c.r_rp_p2);
  os << "schemes: [";
  for (size_t k = 0; k < c.schemes.size(); ++k) os << (k ? ", " : "") << quoted(c.schemes[k]);
  os << "]\n";
  os << "sweep_variable: " << quoted(c.sweep_variable) << '\n';
  os << "sweep_values: [";
  for (size_t k = 0; k < c.sweep_values.size(); ++k)
    os << (k ? ", " : "") << format_double(c.sweep_values[k]);
  os << "]\n";
  integer("trials", c.trials);
  integer("seed", c.seed);
  os << "output: " << quoted(c.output) << '\n';
  return os.str();
}

SimConfig preset(const std::string& name) {
  SimConfig c;
  if (name == "fig2") {
    c.sweep_variable = "gamma_th_db";
    c.sweep_values = stepped(-4, 8, 1, 1.0);
  } else if (name == "fig3") {
    c.sweep_variable = "p_rs_dbm";
    c.sweep_values = stepped(10, 30, 2, 1.0);
  } else if (name == "fig4") {
    c.sweep_variable = "n_su";
    c.sweep_values = stepped(2, 8, 1, 1.0);
  } else if (name == "fig5") {
    c.sweep_variable = "r_a_rs";
    c.sweep_values = stepped(1, 9, 1, 10.0);
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected fig2, fig3, fig4 or fig5)");
  }
  c.output = name + ".csv";
  return c;
}

std::string format_csv(std::vector<OutageEstimate> estimates) {
  std::stable_sort(estimates.begin(), estimates.end(), [](const auto& a, const auto& b) {
    if (a.scheme != b.scheme) return a.scheme < b.scheme;
    return a.sweep_value < b.sweep_value;
  });
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& e : estimates) {
    os << e.scheme << ',' << e.sweep_variable << ',' << format_double(e.sweep_value) << ','
       << e.trials << ',' << e.outages << ',' << format_double(e.probability) << ','
       << format_double(e.ci_low) << ',' << format_double(e.ci_high) << ',' << e.seed << '\n';
  }
  return os.str();
}

void emit_csv(const std::vector<OutageEstimate>& estimates, const std::string& path) {
  if (estimates.empty()) throw ConfigError("emit_csv: no estimates");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("output: cannot write '" + path + "'");
  out << format_csv(estimates);
  if (!out) throw ConfigError("output: write failed for '" + path + "'");
}

}  // namespace cogrelay
