#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sensnet/channel.hpp"
#include "sensnet/config.hpp"
#include "sensnet/csv.hpp"
#include "sensnet/math_util.hpp"
#include "sensnet/policies.hpp"
#include "sensnet/process.hpp"
#include "sensnet/simulator.hpp"

namespace {

using namespace sensnet;

// Output sink: --out PATH or stdout.
struct Sink {
  std::ofstream file;
  std::ostream& open(const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::runtime_error("cannot open output file: " + path);
    return file;
  }
};

struct Common {
  std::string config_path;
  std::string out_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "key = value config file");
  sub->add_option("--out", c.out_path, "output CSV path (default: stdout)");
  sub->add_option("--set", c.sets, "override a config key (key=value)")
      ->take_all();
  sub->add_option("--seed", c.seed, "RNG seed");
  sub->add_option("--jobs", c.jobs, "worker thread cap");
}

AppConfig build_config(const Common& c) {
  AppConfig cfg;
  if (!c.config_path.empty()) cfg = load_config(c.config_path);
  for (const std::string& kv : c.sets) {
    std::size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    apply_config_key(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.sim.seed = *c.seed;
  if (c.jobs) cfg.jobs = *c.jobs;
  return cfg;
}

void sim_comments(CsvWriter& w, const AppConfig& cfg) {
  const SimConfig& s = cfg.sim;
  w.comment("scheme", scheme_name(s.scheme));
  w.comment("scenario", scenario_name(s.scenario));
  w.comment("n_sensors", static_cast<double>(s.n_sensors));
  w.comment("n_channels", static_cast<double>(s.n_channels));
  w.comment("alpha", s.alpha);
  w.comment("s_ambient", s.s_ambient);
  w.comment("c_tx", s.cost.c_tx);
  w.comment("phi", s.cost.phi);
  w.comment("slots", static_cast<double>(s.slots));
  w.comment("seed", std::to_string(s.seed));
  w.comment("outage_threshold", s.outage_threshold);
  w.comment("epsilon", s.epsilon);
  w.comment("lagrange", s.lagrange);
  w.comment("zeta", s.zeta);
  if (!cfg.chain_spec.empty()) w.comment("chain", cfg.chain_spec);
  if (!cfg.table_path.empty()) w.comment("table", cfg.table_path);
}

std::string fixed12(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12f", x);
  return buf;
}

int run_pmf(const Common& c, int ns, int b, double q, double zeta,
            bool has_q, bool brute) {
  if (has_q) {
    zeta = q * ns / b;
  } else {
    q = zeta * b / ns;
  }
  std::vector<double> exact = exact_success_pmf(ns, b, q);
  std::vector<double> binom = binomial_approx_pmf(zeta, b);
  std::vector<double> bf;
  if (brute) bf = brute_force_pmf(ns, b, q);

  Sink sink;
  CsvWriter w(sink.open(c.out_path));
  w.comment("n_sensors", static_cast<double>(ns));
  w.comment("n_channels", static_cast<double>(b));
  w.comment("q", q);
  w.comment("zeta", zeta);
  std::vector<std::string> head{"r", "p_exact", "p_binomial"};
  if (brute) head.push_back("p_bruteforce");
  w.header(head);
  for (int r = 0; r <= b; ++r) {
    std::vector<std::string> row{std::to_string(r), format_double(exact[r]),
                                 format_double(binom[r])};
    if (brute) row.push_back(format_double(bf[r]));
    w.row(row);
  }
  return 0;
}

int run_dp(const Common& c, const std::string& kind, double lagrange) {
  AppConfig cfg = build_config(c);
  const SimConfig& s = cfg.sim;
  PolicyTable table;
  if (kind == "coord") {
    table = coord_dp_solve(lagrange, s.alpha, s.s_ambient, s.cost,
                           s.n_channels, s.dp);
  } else if (kind == "dec") {
    table = dec_dp_solve(lagrange, s.alpha, s.s_ambient, s.cost, s.n_channels,
                         s.dp);
  } else {
    throw std::invalid_argument("dp: --kind must be coord or dec");
  }
  Sink sink;
  table.write_csv(sink.open(c.out_path));
  return 0;
}

int run_simulate(const Common& c, const std::string& trajectory_path) {
  AppConfig cfg = build_config(c);
  cfg.resolve();
  bool record = cfg.trajectory || !trajectory_path.empty();
  if (record && trajectory_path.empty()) {
    throw std::invalid_argument(
        "simulate: trajectory recording needs --trajectory PATH");
  }
  RunArtifacts art = run_episode(cfg.sim, record);

  Sink sink;
  std::ostream& os = sink.open(c.out_path);
  CsvWriter w(os);
  sim_comments(w, cfg);
  w.comment("mse_se", art.mse_se);
  w.comment("sq_err_mean", art.sq_err_mean);
  write_tradeoff_csv(os, {art.point});

  if (record) {
    std::ofstream tf(trajectory_path);
    if (!tf) {
      throw std::runtime_error("cannot open output file: " + trajectory_path);
    }
    CsvWriter tw(tf);
    sim_comments(tw, cfg);
    tw.header({"slot", "v_prior", "v_post", "lambda"});
    for (std::size_t k = 0; k < art.v_post.size(); ++k) {
      tw.row({std::to_string(k), format_double(art.v_prior[k]),
              format_double(art.v_post[k]),
              format_double(art.snr_realized[k])});
    }
  }
  return 0;
}

int run_sweep(const Common& c, const std::string& lambdas,
              const std::string& epsilons, const std::string& zetas) {
  AppConfig cfg = build_config(c);
  if (!lambdas.empty()) cfg.lambdas = parse_grid(lambdas);
  if (!epsilons.empty()) cfg.epsilons = parse_grid(epsilons);
  if (!zetas.empty()) cfg.zetas = parse_grid(zetas);
  int grids = (!cfg.lambdas.empty()) + (!cfg.epsilons.empty()) +
              (!cfg.zetas.empty());
  if (grids != 1) {
    throw std::invalid_argument(
        "sweep: exactly one of --lambdas/--epsilons/--zetas is required");
  }
  cfg.resolve();

  std::string knob = "lagrange";
  const std::vector<double>* grid = &cfg.lambdas;
  if (!cfg.epsilons.empty()) {
    knob = "epsilon";
    grid = &cfg.epsilons;
  } else if (!cfg.zetas.empty()) {
    knob = "zeta";
    grid = &cfg.zetas;
  }
  std::vector<TradeoffPoint> points =
      sweep_tradeoff(cfg.sim, knob, *grid, cfg.jobs);

  Sink sink;
  std::ostream& os = sink.open(c.out_path);
  CsvWriter w(os);
  sim_comments(w, cfg);
  w.comment("knob_kind", knob);
  write_tradeoff_csv(os, points);
  return 0;
}

int run_oracle_seq(const Common& c, double lambda_bar, int horizon,
                   double alpha) {
  SnrSchedule sched = optimal_snr_sequence(lambda_bar, alpha, horizon);
  Sink sink;
  CsvWriter w(sink.open(c.out_path));
  w.comment("lambda_bar", lambda_bar);
  w.comment("horizon_T", static_cast<double>(horizon));
  w.comment("alpha", alpha);
  w.comment("sample_mse", sched.sample_mse);
  w.comment("tail_zeros", static_cast<double>(sched.tail_zeros));
  w.header({"k", "snr"});
  for (std::size_t k = 0; k < sched.snrs.size(); ++k) {
    w.row({std::to_string(k), format_double(sched.snrs[k])});
  }
  return 0;
}

int run_stationary(const Common& c, const std::string& chain_spec) {
  AccuracyChain chain = AccuracyChain::load(chain_spec);
  std::vector<double> pi = stationary_distribution(chain);
  Sink sink;
  CsvWriter w(sink.open(c.out_path));
  w.comment("chain", chain_spec);
  w.header({"state", "gamma", "pi"});
  for (int i = 0; i < chain.size(); ++i) {
    w.row({std::to_string(i), format_double(chain.states[i]),
           fixed12(pi[i])});
  }
  return 0;
}

int run_overhead(const Common& c, const std::string& chain_spec,
                 const std::string& mode, int n_sensors, double avg_active) {
  AppConfig cfg = build_config(c);
  AccuracyChain chain = AccuracyChain::load(chain_spec);
  std::vector<double> pi = stationary_distribution(chain);
  if (mode != "coord" && mode != "dec") {
    throw std::invalid_argument("overhead: --mode must be coord or dec");
  }
  OverheadCosts oh =
      overhead_costs(mode == "coord", chain, pi, n_sensors, cfg.c_gamma,
                     cfg.c_v, cfg.c_schedule, avg_active);
  Sink sink;
  CsvWriter w(sink.open(c.out_path));
  w.comment("chain", chain_spec);
  w.comment("mode", mode);
  w.comment("n_sensors", static_cast<double>(n_sensors));
  w.comment("c_gamma", cfg.c_gamma);
  w.comment("c_v", cfg.c_v);
  w.comment("c_schedule", cfg.c_schedule);
  w.comment("avg_active", avg_active);
  w.header({"uplink_per_slot", "downlink_per_slot"});
  w.row({format_double(oh.uplink_per_slot), format_double(oh.downlink_per_slot)});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sensing-estimation network simulator"};
  app.require_subcommand(1);

  Common common;

  auto* pmf = app.add_subcommand("pmf", "delivered-report count PMFs");
  int pmf_ns = 100, pmf_b = 5;
  double pmf_q = 0.0, pmf_zeta = 0.0;
  bool pmf_brute = false;
  pmf->add_option("--ns", pmf_ns, "number of sensors");
  pmf->add_option("--b", pmf_b, "number of channels");
  auto* q_opt = pmf->add_option("--q", pmf_q, "activation probability");
  auto* z_opt = pmf->add_option("--zeta", pmf_zeta, "normalized load");
  q_opt->excludes(z_opt);
  pmf->add_flag("--brute", pmf_brute, "add the enumeration column");
  add_common(pmf, common);

  auto* dp = app.add_subcommand("dp", "solve and dump a policy table");
  std::string dp_kind = "coord";
  double dp_lagrange = 0.0;
  dp->add_option("--kind", dp_kind, "coord or dec");
  dp->add_option("--lagrange", dp_lagrange, "activation price")->required();
  add_common(dp, common);

  auto* sim = app.add_subcommand("simulate", "run one episode");
  std::string sim_trajectory;
  sim->add_option("--trajectory", sim_trajectory,
                  "also dump the per-slot variance trajectory to this path");
  add_common(sim, common);

  auto* sweep = app.add_subcommand("sweep", "cost/MSE trade-off curve");
  std::string sweep_scheme, sweep_lambdas, sweep_epsilons, sweep_zetas;
  sweep->add_option("--scheme", sweep_scheme, "scheme to sweep");
  sweep->add_option("--lambdas", sweep_lambdas, "lo:hi:n activation prices");
  sweep->add_option("--epsilons", sweep_epsilons, "lo:hi:n network budgets");
  sweep->add_option("--zetas", sweep_zetas, "lo:hi:n normalized loads");
  add_common(sweep, common);

  auto* oseq = app.add_subcommand("oracle-seq",
                                  "budget-constrained finite-horizon schedule");
  double oseq_lambda_bar = 0.0, oseq_alpha = 0.96;
  int oseq_t = 0;
  oseq->add_option("--lambda-bar", oseq_lambda_bar, "average SNR budget")
      ->required();
  oseq->add_option("--t", oseq_t, "horizon (slots 0..T)")->required();
  oseq->add_option("--alpha", oseq_alpha, "process correlation");
  add_common(oseq, common);

  auto* stat = app.add_subcommand("stationary", "accuracy-chain distribution");
  std::string stat_chain;
  stat->add_option("--chain", stat_chain, "preset name or chain file")
      ->required();
  add_common(stat, common);

  auto* over = app.add_subcommand("overhead", "signaling overhead per slot");
  std::string over_chain, over_mode = "coord";
  int over_n = 100;
  double over_avg_active = 0.0;
  over->add_option("--chain", over_chain, "preset name or chain file")
      ->required();
  over->add_option("--mode", over_mode, "coord or dec");
  over->add_option("--n-sensors", over_n, "network size");
  over->add_option("--avg-active", over_avg_active,
                   "average scheduled sensors per slot");
  add_common(over, common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*pmf) {
      if (!*q_opt && !*z_opt) {
        throw std::invalid_argument("pmf: one of --q or --zeta is required");
      }
      return run_pmf(common, pmf_ns, pmf_b, pmf_q, pmf_zeta,
                     static_cast<bool>(*q_opt), pmf_brute);
    }
    if (*dp) return run_dp(common, dp_kind, dp_lagrange);
    if (*sim) return run_simulate(common, sim_trajectory);
    if (*sweep) {
      if (!sweep_scheme.empty()) {
        AppConfig probe;  // validate the name early for a clean message
        apply_config_key(probe, "scheme", sweep_scheme);
        common.sets.push_back("scheme=" + sweep_scheme);
      }
      return run_sweep(common, sweep_lambdas, sweep_epsilons, sweep_zetas);
    }
    if (*oseq) return run_oracle_seq(common, oseq_lambda_bar, oseq_t, oseq_alpha);
    if (*stat) return run_stationary(common, stat_chain);
    if (*over) {
      return run_overhead(common, over_chain, over_mode, over_n,
                          over_avg_active);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
