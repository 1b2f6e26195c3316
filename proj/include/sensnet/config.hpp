#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sensnet/simulator.hpp"

namespace sensnet {

// Run settings as read from a config file, before chain/table files are
// loaded. The CLI resolves this into a SimConfig (resolve() below).
struct AppConfig {
  SimConfig sim;
  std::string chain_spec;       // preset name or path; empty = none
  std::string table_path;       // solved policy table CSV; empty = none
  int jobs = 1;
  bool trajectory = false;
  double c_gamma = 1.0;         // signaling unit costs for the overhead report
  double c_v = 1.0;
  double c_schedule = 1.0;
  std::vector<double> lambdas;  // sweep grids; at most one may be set
  std::vector<double> epsilons;
  std::vector<double> zetas;

  // Loads the chain / table named above and points sim at them. The loaded
  // objects live in the two optionals, so the AppConfig must outlive sim.
  void resolve();

  std::optional<AccuracyChain> chain_storage;
  std::optional<PolicyTable> table_storage;
};

// "lo:hi:n" -> n evenly spaced values from lo to hi (n >= 1; hi = lo allowed
// only when n == 1).
std::vector<double> parse_grid(const std::string& spec);

// key = value lines with '#' comments and blank lines ignored. Unknown keys
// are an error naming the key. Values are validated on the spot.
AppConfig parse_config(std::istream& in);
AppConfig load_config(const std::string& path);

// Applies one key = value assignment (also used for CLI overrides).
void apply_config_key(AppConfig& cfg, const std::string& key,
                      const std::string& value);

}  // namespace sensnet
