#include "sensnet/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sensnet/csv.hpp"
#include "sensnet/math_util.hpp"

namespace sensnet {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

long parse_long(const std::string& key, const std::string& value) {
  long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw std::invalid_argument("config: key '" + key +
                                "' needs an integer, got '" + value + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    return parse_double(value);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: key '" + key +
                                "' needs a number, got '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw std::invalid_argument("config: key '" + key +
                              "' needs true/false, got '" + value + "'");
}

}  // namespace

std::vector<double> parse_grid(const std::string& spec) {
  std::size_t c1 = spec.find(':');
  std::size_t c2 = c1 == std::string::npos ? c1 : spec.find(':', c1 + 1);
  if (c2 == std::string::npos || spec.find(':', c2 + 1) != std::string::npos) {
    throw std::invalid_argument("grid spec must look like lo:hi:n, got '" +
                                spec + "'");
  }
  double lo = parse_double(spec.substr(0, c1));
  double hi = parse_double(spec.substr(c1 + 1, c2 - c1 - 1));
  long n = parse_long("grid", spec.substr(c2 + 1));
  if (n < 1) throw std::invalid_argument("grid spec needs n >= 1");
  if (n == 1) {
    if (lo != hi) {
      throw std::invalid_argument("grid spec with n = 1 needs lo == hi");
    }
    return {lo};
  }
  if (!(hi > lo)) throw std::invalid_argument("grid spec needs hi > lo");
  return lin_spaced(lo, hi, static_cast<int>(n));
}

void apply_config_key(AppConfig& cfg, const std::string& key,
                      const std::string& value) {
  SimConfig& s = cfg.sim;
  if (key == "scheme") {
    s.scheme = parse_scheme(value);
  } else if (key == "scenario") {
    s.scenario = parse_scenario(value);
  } else if (key == "n_sensors") {
    s.n_sensors = static_cast<int>(parse_long(key, value));
  } else if (key == "n_channels") {
    s.n_channels = static_cast<int>(parse_long(key, value));
  } else if (key == "alpha") {
    s.alpha = parse_real(key, value);
    ProcessParams range_check(s.alpha);
    (void)range_check;
  } else if (key == "s_ambient") {
    s.s_ambient = parse_real(key, value);
  } else if (key == "c_tx") {
    s.cost.c_tx = parse_real(key, value);
  } else if (key == "phi") {
    s.cost.phi = parse_real(key, value);
  } else if (key == "slots") {
    s.slots = parse_long(key, value);
  } else if (key == "seed") {
    s.seed = static_cast<std::uint64_t>(parse_long(key, value));
  } else if (key == "outage_threshold") {
    s.outage_threshold = parse_real(key, value);
  } else if (key == "epsilon") {
    s.epsilon = parse_real(key, value);
  } else if (key == "lagrange") {
    s.lagrange = parse_real(key, value);
  } else if (key == "zeta") {
    s.zeta = parse_real(key, value);
  } else if (key == "chain") {
    cfg.chain_spec = value;
  } else if (key == "table") {
    cfg.table_path = value;
  } else if (key == "jobs") {
    cfg.jobs = static_cast<int>(parse_long(key, value));
  } else if (key == "trajectory") {
    cfg.trajectory = parse_bool(key, value);
  } else if (key == "c_gamma") {
    cfg.c_gamma = parse_real(key, value);
  } else if (key == "c_v") {
    cfg.c_v = parse_real(key, value);
  } else if (key == "c_schedule") {
    cfg.c_schedule = parse_real(key, value);
  } else if (key == "lambdas") {
    cfg.lambdas = parse_grid(value);
  } else if (key == "epsilons") {
    cfg.epsilons = parse_grid(value);
  } else if (key == "zetas") {
    cfg.zetas = parse_grid(value);
  } else if (key == "dp_v_cells") {
    s.dp.v_cells = static_cast<int>(parse_long(key, value));
  } else if (key == "dp_iterations") {
    s.dp.iterations = static_cast<int>(parse_long(key, value));
  } else if (key == "dp_snr_points") {
    s.dp.snr_points = static_cast<int>(parse_long(key, value));
  } else if (key == "dp_zeta_points") {
    s.dp.zeta_points = static_cast<int>(parse_long(key, value));
  } else if (key == "dp_s_measure_points") {
    s.dp.s_measure_points = static_cast<int>(parse_long(key, value));
  } else if (key == "dp_refine") {
    s.dp.refine = parse_bool(key, value);
  } else if (key == "mod17_tau") {
    s.mod17.tau = parse_real(key, value);
  } else if (key == "mod17_q") {
    s.mod17.q = parse_real(key, value);
  } else if (key == "mod17_s_measure") {
    s.mod17.s_measure = parse_real(key, value);
  } else if (key == "mod17_grid_points") {
    s.mod17.grid_points = static_cast<int>(parse_long(key, value));
  } else if (key == "mod17_grid_width") {
    s.mod17.grid_width = parse_real(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

AppConfig parse_config(std::istream& in) {
  AppConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");
    }
    apply_config_key(cfg, key, value);
  }
  int grids = (!cfg.lambdas.empty()) + (!cfg.epsilons.empty()) +
              (!cfg.zetas.empty());
  if (grids > 1) {
    throw std::invalid_argument(
        "config: lambdas, epsilons and zetas are mutually exclusive");
  }
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse_config(in);
}

void AppConfig::resolve() {
  if (!chain_spec.empty()) {
    chain_storage = AccuracyChain::load(chain_spec);
    sim.chain = &*chain_storage;
  }
  if (!table_path.empty()) {
    table_storage = PolicyTable::read_csv_file(table_path);
    sim.table = &*table_storage;
  }
}

}  // namespace sensnet
