#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "sqe/remainder.hpp"

namespace sqe {

const std::vector<std::string>& experiment_names();

// Flat key: value configuration. Every value is a list of reals (scalars have one entry);
// the canonical form is the sorted "key = v1, v2" lines and is what gets hashed.
struct ExperimentConfig {
  std::string experiment;
  std::map<std::string, std::vector<double>> values;
  std::uint64_t seed_value = 1;  // kept out of `values` so all 64 bits survive
  std::filesystem::path out = "out";

  double num(const std::string& key) const;
  long integer(const std::string& key) const;
  std::uint64_t seed() const { return seed_value; }
  std::size_t replicas() const { return std::size_t(integer("replicas")); }
  const std::vector<double>& list(const std::string& key) const;
  bool flag(const std::string& key) const { return num(key) != 0; }

  SolverConfig solver() const;
  std::string canonical() const;
  std::string hash() const;  // SHA-256 hex of canonical()
  // canonical() plus the declared tolerances, one "# tolerance:" line each
  std::string echo() const;
};

struct ConfigOverrides {
  std::map<std::string, std::vector<double>> values;
  bool has_seed = false;
  std::uint64_t seed = 0;
};

// Defaults for the experiment, then the file (if any), then the overrides; validated.
// Throws ConfigError naming the offending key or constraint.
ExperimentConfig parse_config(const std::string& experiment, const std::filesystem::path* file,
                              const ConfigOverrides& overrides = {});
ExperimentConfig parse_config_text(const std::string& experiment, const std::string& yaml_text,
                                   const ConfigOverrides& overrides = {});

// Tolerances each experiment declares before running.
std::vector<std::string> declared_tolerances(const std::string& experiment);

std::string sha256_hex(const std::string& data);

}  // namespace sqe
