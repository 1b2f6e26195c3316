#pragma once

#include <cstdint>
#include <iosfwd>
#include <list>
#include <string>
#include <utility>
#include <vector>

#include "sensnet/policies.hpp"
#include "sensnet/process.hpp"

namespace sensnet {

enum class Scheme {
  coord_dp,   // coordinated, table-driven scheduling
  dec_dp,     // decentralized, table-driven random access
  coord_snr,  // coordinated, fixed budget-optimal design
  dec_snr,    // decentralized, fixed budget-optimal design
  scdp,       // coordinated table reused under varying accuracy (ranking)
  sddp,       // decentralized table reused under varying accuracy (threshold)
  mod17,      // censoring baseline with numerically integrated posterior
  na,         // single-channel, noiseless, fixed activation
  amp,        // single-channel, noiseless, age-adaptive activation
  mp,         // single-channel, noiseless, age-threshold activation
};

enum class Scenario { best, iid, markov };

Scheme parse_scheme(const std::string& name);
std::string scheme_name(Scheme s);
Scenario parse_scenario(const std::string& name);
std::string scenario_name(Scenario s);

// Censoring-baseline knobs. Exactly one of tau / q fixes the threshold: a
// negative tau means "derive tau from q".
struct Mod17Config {
  double tau = -1.0;
  double q = 0.0;
  double s_measure = 0.0;        // <= 0: pick (q, s_measure) from the budget
  int grid_points = 2001;        // odd, >= 101
  double grid_width = 8.0;       // prior-sigma multiples on each side

  void validate() const;
};

struct SimConfig {
  Scheme scheme = Scheme::coord_snr;
  Scenario scenario = Scenario::best;
  int n_sensors = 100;
  int n_channels = 5;
  double alpha = 0.96;
  double s_ambient = 20.0;
  CostModel cost;
  long slots = 100000;
  std::uint64_t seed = 1;
  double outage_threshold = 0.2;

  double epsilon = 0.0;   // per-slot network budget (coord_snr, dec_snr, mod17)
  double lagrange = 0.0;  // activation price (amp, mp; recorded for dp runs)
  double zeta = 0.0;      // fixed per-channel load (na)

  Mod17Config mod17;

  // Accuracy model; required whenever the scenario is not best-gamma or the
  // scheme is sddp (its rule depends on the state distribution).
  const AccuracyChain* chain = nullptr;
  // Solved policy; required for coord_dp, dec_dp, scdp, sddp.
  const PolicyTable* table = nullptr;
  // Solver settings used when a sweep or cost-matching call builds tables.
  DpOptions dp;

  void validate() const;
};

// One point of the cost/accuracy trade-off, as written to sweep CSVs.
struct TradeoffPoint {
  std::string scheme;
  std::string scenario;
  std::string knob_kind;  // "lagrange" | "epsilon" | "zeta"
  double knob_value = 0.0;
  double per_sn_cost = 0.0;
  double network_cost = 0.0;
  double mse = 0.0;
  double outage = 0.0;
  double collisions_per_slot = 0.0;
  std::uint64_t seed = 0;
  long slots = 0;
};

struct RunArtifacts {
  TradeoffPoint point;
  double sq_err_mean = 0.0;   // empirical (x_hat - x)^2 time average
  double mse_se = 0.0;        // batch-means standard error of point.mse
  std::vector<double> per_sn_cost;  // long-run average cost of each sensor
  // Optional per-slot trace (enabled by record_trajectory).
  std::vector<double> v_prior;
  std::vector<double> v_post;
  std::vector<double> snr_realized;
};

RunArtifacts run_episode(const SimConfig& cfg, bool record_trajectory = false);

// Sweeps one knob over a grid, one episode per value, all sharing the seed of
// the template config so that curves of different schemes are paired.
// knob_kind must be "lagrange", "epsilon" or "zeta".
std::vector<TradeoffPoint> sweep_tradeoff(const SimConfig& base,
                                          const std::string& knob_kind,
                                          const std::vector<double>& knob_grid,
                                          int jobs = 1);

// Applies one knob value to a config (what sweep_tradeoff does per point).
// For table-driven schemes "lagrange" solves the matching table; the solve is
// cached per (scheme, lagrange) inside `cache` when one is supplied.
struct TableCache {
  std::list<std::pair<double, PolicyTable>> coord, dec;
  const PolicyTable* get(PolicyKind kind, double lagrange, double alpha,
                         double s_ambient, const CostModel& cost,
                         int n_channels, const DpOptions& opt = {});
};

// Bisects the activation price of a table-driven scheme until the realized
// per-slot network cost is within rel_tol of target_network_cost. Returns the
// matched run; the price bracket is grown automatically.
RunArtifacts match_network_cost(SimConfig cfg, double target_network_cost,
                                TableCache& cache, double rel_tol = 0.01,
                                const DpOptions& opt = {});

void write_tradeoff_csv(std::ostream& os,
                        const std::vector<TradeoffPoint>& points);
std::vector<TradeoffPoint> read_tradeoff_csv(std::istream& is);

// Picks the censoring design (q*, s_measure*) that maximizes the expected
// delivered SNR under the per-sensor budget epsilon / n_sensors.
struct Mod17Design {
  double q = 0.0;
  double tau = 0.0;
  double s_measure = 0.0;
  double objective = 0.0;
};
Mod17Design mod17_tune(double epsilon, const CostModel& cost, double s_ambient,
                       int n_channels, int n_sensors);

}  // namespace sensnet
