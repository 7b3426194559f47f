#include "sqe/config.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace sqe {

namespace {

using Values = std::map<std::string, std::vector<double>>;

const Values& global_defaults() {
  static const Values g = {
      {"n", {3}},
      {"a", {0, 0, 0, 1}},
      {"cutoff", {8}},
      {"dt", {1e-3}},
      {"horizon", {1}},
      {"alpha0", {0.1}},
      {"alpha", {0.05}},
      {"alpha_prime", {0.05}},
      {"beta", {0.3}},
      {"gamma", {0.25}},
      {"explosion_threshold", {1e8}},
      {"graded", {0}},
      {"dt0", {1e-8}},
      {"grade", {0.05}},
      {"replicas", {1}},
  };
  return g;
}

// Experiment keys and the values that differ from the globals. A key is accepted for an
// experiment only if it is global or listed here.
const std::map<std::string, Values>& experiment_defaults() {
  static const std::map<std::string, Values> e = {
      {"wick-covariance", {{"replicas", {10000}}, {"orders", {1, 2, 3}}, {"lags", {0, 0.1}}}},
      {"restart-consistency",
       {{"t", {0.5}},
        {"h", {0.5}},
        {"replicas", {3}},
        {"coarse_dt", {1e-2}},
        {"identity_cutoff", {4}},
        {"paths", {20}}}},
      {"dissipation",
       {{"cutoff", {16}}, {"horizon", {0.5}}, {"graded", {1}}, {"replicas", {16}}, {"x_scales", {10, 100, 1000}}}},
      {"moments",
       {{"replicas", {1000}},
        {"horizon", {2}},
        {"graded", {1}},
        {"x_scales", {0, 10, 100}},
        {"times", {0.01, 0.05, 0.1, 1, 2}},
        {"p", {2}}}},
      {"linearization", {{"horizon", {0.2}}, {"directions", {10}}}},
      {"bel",
       {{"cutoff", {2}},
        {"dt", {0.01}},
        {"horizon", {0.5}},
        {"t", {0.5}},
        {"replicas", {100000}},
        {"r", {4}},
        {"r_sensitivity", {0.3, 0.5, 0.9}}}},
      {"tv",
       {{"cutoff", {2}},
        {"dt", {0.01}},
        {"horizon", {0.5}},
        {"t", {0.5}},
        {"replicas", {10000}},
        {"distances", {1, 0.1, 0.01, 0.001}},
        {"r_values", {0.3, 0.5, 0.9, 2, 4, 8}}}},
      {"gibbs-compare",
       {{"cutoff", {4}},
        {"replicas", {16}},
        {"burn_in_time", {5}},
        {"run_time", {500}},
        {"sample_every", {0.05}},
        {"chains", {8}},
        {"chain_length", {200000}},
        {"negative_control_shift", {0.25}}}},
      {"mixing", {{"replicas", {1000}}, {"horizon", {6}}, {"y_scale", {5}}, {"times", {0.5, 1, 2, 4, 6}}}},
      {"control", {}},
      {"support-probe",
       {{"replicas", {16}},
        {"m_range", {3, 4, 5}},
        {"renorm_targets", {0, 0.25}},
        {"lambda", {0.5}},
        {"probe_alpha", {0.5}}}},
      {"besov-suite", {{"cutoff", {12}}, {"samples", {200}}}},
      {"kernel-bounds", {{"windows", {64, 128}}}},
  };
  return e;
}

std::string format_value(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::vector<double> node_values(const std::string& key, const YAML::Node& node) {
  auto scalar = [&](const YAML::Node& s) -> double {
    const std::string& text = s.Scalar();
    if (text == "true") return 1;
    if (text == "false") return 0;
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("key '" + key + "': not a number: '" + text + "'");
    }
  };
  std::vector<double> out;
  if (node.IsScalar()) {
    out.push_back(scalar(node));
  } else if (node.IsSequence()) {
    for (const auto& e : node) {
      if (!e.IsScalar()) throw ConfigError("key '" + key + "': list entries must be numbers");
      out.push_back(scalar(e));
    }
  } else {
    throw ConfigError("key '" + key + "': expected a number or a list of numbers");
  }
  return out;
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t used = 0;
    unsigned long long v = std::stoull(text, &used);
    if (used != text.size() || (!text.empty() && text[0] == '-')) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("seed must be a non-negative integer (got '" + text + "')");
  }
}

void apply(ExperimentConfig& c, const std::string& key, std::vector<double> v) {
  if (!c.values.count(key)) throw ConfigError("unknown key '" + key + "' for experiment " + c.experiment);
  if (v.empty()) throw ConfigError("key '" + key + "' has no values");
  c.values[key] = std::move(v);
}

ExperimentConfig defaults_for(const std::string& experiment) {
  const auto& ed = experiment_defaults();
  auto it = ed.find(experiment);
  if (it == ed.end()) throw ConfigError("unknown experiment '" + experiment + "'");
  ExperimentConfig c;
  c.experiment = experiment;
  c.values = global_defaults();
  for (const auto& [k, v] : it->second) c.values[k] = v;
  return c;
}

bool is_integer(double x) { return std::isfinite(x) && std::floor(x) == x; }

void validate(const ExperimentConfig& c) {
  for (const auto& [k, v] : c.values)
    for (double x : v)
      if (!std::isfinite(x)) throw ConfigError("key '" + k + "' has a non-finite value");
  if (c.values.at("n").size() != 1 || !is_integer(c.num("n"))) throw ConfigError("n must be a single integer");
  for (const char* k : {"replicas", "directions", "samples", "chains", "chain_length", "paths"}) {
    if (!c.values.count(k)) continue;
    double v = c.num(k);
    if (!is_integer(v) || v < 1) throw ConfigError(std::string(k) + " must be a positive integer");
  }
  check_config(c.solver());
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    // registry order, which is also the order used in help text
    return std::vector<std::string>{"wick-covariance", "restart-consistency", "dissipation", "moments",
                                    "linearization",   "bel",                 "tv",          "gibbs-compare",
                                    "mixing",          "control",             "support-probe", "besov-suite",
                                    "kernel-bounds"};
  }();
  return names;
}

double ExperimentConfig::num(const std::string& key) const { return list(key).at(0); }

long ExperimentConfig::integer(const std::string& key) const {
  double v = num(key);
  if (!is_integer(v)) throw ConfigError("key '" + key + "' must be an integer");
  return long(v);
}

const std::vector<double>& ExperimentConfig::list(const std::string& key) const {
  auto it = values.find(key);
  if (it == values.end() || it->second.empty()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

SolverConfig ExperimentConfig::solver() const {
  SolverConfig s;
  s.n = int(num("n"));
  s.a = list("a");
  s.cutoff = num("cutoff");
  s.dt = num("dt");
  s.horizon = num("horizon");
  s.reg.alpha0 = num("alpha0");
  s.reg.alpha = num("alpha");
  s.reg.alpha_prime = num("alpha_prime");
  s.reg.beta = num("beta");
  s.reg.gamma = num("gamma");
  s.explosion_threshold = num("explosion_threshold");
  s.graded = flag("graded");
  s.dt0 = num("dt0");
  s.grade = num("grade");
  return s;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "experiment = " << experiment << "\n";
  std::map<std::string, std::string> lines;
  for (const auto& [k, v] : values) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_value(v[i]);
    lines[k] = s;
  }
  lines["seed"] = std::to_string(seed_value);
  for (const auto& [k, s] : lines) os << k << " = " << s << "\n";
  return os.str();
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical()); }

std::string ExperimentConfig::echo() const {
  std::string s = canonical();
  for (const auto& t : declared_tolerances(experiment)) s += "# tolerance: " + t + "\n";
  return s;
}

ExperimentConfig parse_config_text(const std::string& experiment, const std::string& yaml_text,
                                   const ConfigOverrides& overrides) {
  ExperimentConfig c = defaults_for(experiment);
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("config is not valid YAML: ") + e.what());
  }
  if (root && !root.IsNull()) {
    if (!root.IsMap()) throw ConfigError("config must be a flat key: value map");
    std::set<std::string> seen;
    for (const auto& kv : root) {
      const std::string key = kv.first.as<std::string>();
      if (!seen.insert(key).second) throw ConfigError("duplicate key '" + key + "'");
      if (key == "experiment") {
        if (kv.second.as<std::string>() != experiment)
          throw ConfigError("config is for experiment '" + kv.second.as<std::string>() + "', not " + experiment);
      } else if (key == "seed") {
        if (!kv.second.IsScalar()) throw ConfigError("seed must be a single integer");
        c.seed_value = parse_seed(kv.second.Scalar());
      } else if (key == "out") {
        c.out = kv.second.as<std::string>();
      } else {
        apply(c, key, node_values(key, kv.second));
      }
    }
  }
  for (const auto& [k, v] : overrides.values) apply(c, k, v);
  if (overrides.has_seed) c.seed_value = overrides.seed;
  validate(c);
  return c;
}

ExperimentConfig parse_config(const std::string& experiment, const std::filesystem::path* file,
                              const ConfigOverrides& overrides) {
  std::string text;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw ConfigError("cannot read config file " + file->string());
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  return parse_config_text(experiment, text, overrides);
}

std::vector<std::string> declared_tolerances(const std::string& experiment) {
  static const std::map<std::string, std::vector<std::string>> t = {
      {"wick-covariance", {"|empirical - analytic| < 4 SE per (order, lag, test function)"}},
      {"restart-consistency",
       {"direct vs restarted sup coefficient error < 1e-8",
        "the same < 1e-8 at the coarse dt",
        "restart binomial and shifted Wick identities < 1e-9 over all paths"}},
      {"dissipation",
       {"max/min of ||v(0.5)||_2^2 across initial scales < 2, per diagram case",
        "log-log slope of the path-mean ||v||_2^2 on [0.01, horizon] for the largest scale within [-1.25, -0.75]",
        "a priori constant spread max/min < 1.5", "comparison bound never exceeded"}},
      {"moments", {"max pairwise z of weighted moments at t >= 1 below 4", "small-time weighted moment spread < 10"}},
      {"linearization", {"observed FD order >= 0.9 between the two steps", "linearity defect < 1e-10"}},
      {"bel", {"|LHS - RHS| < 4 SE of the paired difference", "Girsanov weight mean within 4 SE of 1"}},
      {"tv", {"dictionary gap nonincreasing as the distance shrinks", "P(stopped) nondecreasing in t"}},
      {"gibbs-compare",
       {"dynamics vs Metropolis z < 4 per observable", "perturbed-renormalization control max z > 4"}},
      {"mixing",
       {"D decreasing over the time list", "D(last)/D(1) < 0.5", "95% upper bound of fitted ratio < 1",
        "half-dictionary ratio within 30%"}},
      {"control",
       {"endpoint C^-alpha0 error < 1e-5 per target", "observed order >= 0.9 under dt halving",
        "zero target from zero stays zero"}},
      {"support-probe", {"residual medians decrease along m for every renormalization target"}},
      {"besov-suite", {"every inequality constant finite with < 50% drift under sample doubling"}},
      {"kernel-bounds", {"fitted kernel constants at the two windows within 10%"}},
  };
  auto it = t.find(experiment);
  return it == t.end() ? std::vector<std::string>{} : it->second;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, data.data(), data.size()) != 1 || EVP_DigestFinal_ex(ctx, md, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 failed");
  }
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

}  // namespace sqe
