#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "sensnet/estimator.hpp"
#include "sensnet/policies.hpp"
#include "sensnet/process.hpp"
#include "sensnet/simulator.hpp"

using namespace sensnet;

namespace {

const CostModel kBaseCost{1.0, 0.25};

DpOptions reduced_options() {
  DpOptions opt;
  opt.v_cells = 201;
  opt.iterations = 40;
  opt.snr_points = 120;
  opt.zeta_points = 41;
  opt.s_measure_points = 40;
  opt.refine = false;
  return opt;
}

bool same_point(const TradeoffPoint& a, const TradeoffPoint& b) {
  return a.scheme == b.scheme && a.scenario == b.scenario &&
         a.knob_kind == b.knob_kind && a.knob_value == b.knob_value &&
         a.per_sn_cost == b.per_sn_cost && a.network_cost == b.network_cost &&
         a.mse == b.mse && a.outage == b.outage &&
         a.collisions_per_slot == b.collisions_per_slot && a.seed == b.seed &&
         a.slots == b.slots;
}

double mean_of(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += x;
  return static_cast<double>(s / static_cast<long double>(v.size()));
}

}  // namespace

TEST_CASE("identical configs reproduce bit-identical results") {
  SimConfig cfg;
  cfg.scheme = Scheme::dec_snr;
  cfg.n_sensors = 50;
  cfg.epsilon = 8.0;
  cfg.slots = 20000;
  cfg.seed = 7;

  RunArtifacts a = run_episode(cfg);
  RunArtifacts b = run_episode(cfg);
  CHECK(same_point(a.point, b.point));
  CHECK(a.sq_err_mean == b.sq_err_mean);
  CHECK(a.mse_se == b.mse_se);

  cfg.seed = 8;
  RunArtifacts c = run_episode(cfg);
  CHECK(c.point.mse != a.point.mse);
}

TEST_CASE("network cost equals the per-sensor total") {
  SimConfig cfg;
  cfg.scheme = Scheme::dec_snr;
  cfg.n_sensors = 40;
  cfg.epsilon = 10.0;
  cfg.slots = 20000;
  cfg.seed = 2;

  RunArtifacts art = run_episode(cfg);
  CHECK(art.per_sn_cost.size() == 40);
  CHECK(art.point.per_sn_cost ==
        doctest::Approx(art.point.network_cost / 40.0).epsilon(1e-15));
  double total = 0.0;
  for (double c : art.per_sn_cost) total += c;
  CHECK(total == doctest::Approx(art.point.network_cost).epsilon(1e-9));

  // Coordinated scheduling concentrates the spend on the scheduled sensors;
  // the identity is about totals, not symmetry of the split.
  SimConfig co;
  co.scheme = Scheme::coord_snr;
  co.n_sensors = 20;
  co.epsilon = 20.0;
  co.slots = 10000;
  RunArtifacts cart = run_episode(co);
  double ctotal = 0.0;
  for (double c : cart.per_sn_cost) ctotal += c;
  CHECK(ctotal == doctest::Approx(cart.point.network_cost).epsilon(1e-9));
  CHECK(cart.per_sn_cost.front() > 0.0);
  CHECK(cart.per_sn_cost.back() == 0.0);
}

TEST_CASE("the reported variance is an honest error forecast") {
  // Time-average of (x_hat - x)^2 has to track the time-average of v_post.
  // The chi-square fluctuation of the squared error adds ~sqrt(2 E[v^2]/T)
  // on top of the batch-means error of the variance trace; serial error
  // correlation is mild at these gains, covered by the 1.5 inflation.
  auto consistent = [](const SimConfig& cfg) {
    RunArtifacts art = run_episode(cfg, true);
    double m2 = 0.0;
    for (double v : art.v_post) m2 += v * v;
    m2 /= static_cast<double>(art.v_post.size());
    double se_chi = std::sqrt(2.0 * m2 / static_cast<double>(cfg.slots));
    double tol = 3.0 * (1.5 * se_chi + art.mse_se);
    INFO("sq_err_mean=", art.sq_err_mean, " mse=", art.point.mse,
         " tol=", tol);
    CHECK(std::fabs(art.sq_err_mean - art.point.mse) <= tol);
  };

  SimConfig coord;
  coord.scheme = Scheme::coord_snr;
  coord.n_sensors = 20;
  coord.epsilon = 1.0 + std::sqrt(5.0);
  coord.slots = 100000;
  coord.seed = 3;
  consistent(coord);

  PolicyTable dec = dec_dp_solve(0.3, 0.96, 20.0, kBaseCost, 5,
                                 reduced_options());
  SimConfig dd;
  dd.scheme = Scheme::dec_dp;
  dd.n_sensors = 50;
  dd.table = &dec;
  dd.slots = 100000;
  dd.seed = 4;
  consistent(dd);
}

TEST_CASE("a zero-snr policy never transmits and the variance saturates") {
  PolicyTable idle = constant_coord_policy(0.0, 0.96, 20.0, kBaseCost, 5);
  SimConfig cfg;
  cfg.scheme = Scheme::coord_dp;
  cfg.n_sensors = 10;
  cfg.table = &idle;
  cfg.slots = 5000;

  RunArtifacts art = run_episode(cfg, true);
  CHECK(art.point.mse == 1.0);
  CHECK(art.point.network_cost == 0.0);
  CHECK(art.point.per_sn_cost == 0.0);
  CHECK(art.point.collisions_per_slot == 0.0);
  CHECK(art.point.outage == 1.0);
  for (std::size_t k = 0; k < art.v_post.size(); k += 500) {
    CHECK(art.v_post[k] == 1.0);
    CHECK(art.snr_realized[k] == 0.0);
  }
}

TEST_CASE("fixed single-channel activation matches its closed form") {
  SimConfig cfg;
  cfg.scheme = Scheme::na;
  cfg.scenario = Scenario::best;
  cfg.n_sensors = 200;
  cfg.n_channels = 1;
  cfg.alpha = 0.95;
  cfg.zeta = 1.0;
  cfg.slots = 300000;
  cfg.seed = 3;

  RunArtifacts art = run_episode(cfg);
  CostMse ref = na_closed_form(1.0, 0.95, 200);
  CHECK(art.point.mse == doctest::Approx(ref.mse).epsilon(0.02));
  CHECK(art.point.per_sn_cost == doctest::Approx(ref.per_sn_cost).epsilon(0.02));
  CHECK(art.point.knob_kind == "zeta");
  CHECK(art.point.knob_value == 1.0);
  CHECK(art.point.scheme == "na");
  CHECK(art.point.seed == 3);
  CHECK(art.point.slots == 300000);

  // Collision fraction: P(two or more of 200 sensors hit the single channel).
  double q = 1.0 / 200.0;
  double none = std::pow(1.0 - q, 200);
  double one = 200.0 * q * std::pow(1.0 - q, 199);
  double collide = 1.0 - none - one;
  double se = std::sqrt(collide * (1.0 - collide) / 300000.0);
  CHECK(std::fabs(art.point.collisions_per_slot - collide) <= 3.0 * se);
}

TEST_CASE("age-adaptive activation matches its stationary analysis") {
  SimConfig cfg;
  cfg.scheme = Scheme::amp;
  cfg.n_sensors = 200;
  cfg.n_channels = 1;
  cfg.alpha = 0.95;
  cfg.lagrange = 0.2;
  cfg.slots = 300000;
  cfg.seed = 5;

  RunArtifacts art = run_episode(cfg);
  CostMse ref = amp_stationary_metrics(0.2, 0.95, 200);
  CHECK(art.point.mse == doctest::Approx(ref.mse).epsilon(0.02));
  CHECK(art.point.per_sn_cost == doctest::Approx(ref.per_sn_cost).epsilon(0.02));
  CHECK(art.point.knob_kind == "lagrange");
}

TEST_CASE("budget-optimal coordination spends the budget and hits the floor") {
  SimConfig cfg;
  cfg.scheme = Scheme::coord_snr;
  cfg.n_sensors = 20;
  cfg.epsilon = 1.0 + std::sqrt(5.0);  // single-sensor regime, no time sharing
  cfg.slots = 100000;
  cfg.seed = 1;

  RunArtifacts art = run_episode(cfg);
  CHECK(art.point.per_sn_cost ==
        doctest::Approx(cfg.epsilon / 20.0).epsilon(1e-12));
  CHECK(art.point.mse == doctest::Approx(0.0614).epsilon(0.01));
  CHECK(art.point.collisions_per_slot == 0.0);
  CHECK(art.point.knob_kind == "epsilon");

  // Fractional designs time-share: the spend matches in expectation only.
  SimConfig ts;
  ts.scheme = Scheme::coord_snr;
  ts.n_sensors = 20;
  ts.epsilon = 5.0;
  ts.slots = 100000;
  RunArtifacts tart = run_episode(ts);
  CoordinatedDesign d = max_snr_coordinated(5.0, kBaseCost, 20.0, 5);
  CHECK(d.time_sharing);
  double slot_cost = 1.0 + 0.25 * d.s_measure;
  double frac = d.m_bar - std::floor(d.m_bar);
  double se = slot_cost * std::sqrt(frac * (1.0 - frac) / 100000.0) / 20.0;
  CHECK(std::fabs(tart.point.network_cost - 5.0) <= 4.0 * 20.0 * se);
  CHECK(tart.point.collisions_per_slot == 0.0);
  CHECK(tart.point.mse < art.point.mse);
  CHECK(tart.point.mse > mse_floor(2.0 * local_snr(1.0, 20.0, d.s_measure),
                                   0.96) * 0.99);
}

TEST_CASE("uniform accuracy makes the ranking variant an exact replay") {
  PolicyTable coord = coord_dp_solve(0.2, 0.96, 20.0, kBaseCost, 5,
                                     reduced_options());
  SimConfig base;
  base.scheme = Scheme::coord_dp;
  base.n_sensors = 10;
  base.table = &coord;
  base.slots = 20000;
  base.seed = 9;

  SimConfig ranked = base;
  ranked.scheme = Scheme::scdp;

  RunArtifacts a = run_episode(base, true);
  RunArtifacts b = run_episode(ranked, true);
  CHECK(a.point.mse == doctest::Approx(b.point.mse).epsilon(1e-12));
  CHECK(a.point.network_cost ==
        doctest::Approx(b.point.network_cost).epsilon(1e-12));
  CHECK(a.sq_err_mean == doctest::Approx(b.sq_err_mean).epsilon(1e-12));
  CHECK(a.point.collisions_per_slot == 0.0);
  CHECK(b.point.collisions_per_slot == 0.0);
  double dv = 0.0;
  for (std::size_t k = 0; k < a.v_post.size(); ++k) {
    dv = std::max(dv, std::fabs(a.v_post[k] - b.v_post[k]));
  }
  CHECK(dv <= 1e-9);

  // The realized aggregate snr of each slot is the action the table asked
  // for: the per-sensor split reassembles it exactly.
  double worst = 0.0;
  for (std::size_t k = 0; k < a.v_prior.size(); ++k) {
    double want = coord.coord_action(a.v_prior[k]);
    worst = std::max(worst,
                     std::fabs(a.snr_realized[k] - want) / (1.0 + want));
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("threshold reuse of the decentralized table is faithful under iid accuracy") {
  // Only top-accuracy sensors activate at these loads, so the delivered
  // reports follow the same law as the uniform best-accuracy system; the
  // two estimates must agree up to Monte-Carlo noise.
  PolicyTable dec = dec_dp_solve(0.3, 0.96, 20.0, kBaseCost, 5,
                                 reduced_options());
  AccuracyChain chain = AccuracyChain::preset_paper_v();

  SimConfig best;
  best.scheme = Scheme::dec_dp;
  best.n_sensors = 100;
  best.table = &dec;
  best.slots = 100000;
  best.seed = 11;

  SimConfig iid = best;
  iid.scheme = Scheme::sddp;
  iid.scenario = Scenario::iid;
  iid.chain = &chain;
  iid.seed = 12;

  RunArtifacts a = run_episode(best);
  RunArtifacts b = run_episode(iid);
  double se = std::sqrt(a.mse_se * a.mse_se + b.mse_se * b.mse_se);
  INFO("best=", a.point.mse, " iid=", b.point.mse, " se=", se);
  CHECK(std::fabs(a.point.mse - b.point.mse) <= 3.0 * se);
}

TEST_CASE("censoring baseline: a huge threshold keeps the prior") {
  SimConfig cfg;
  cfg.scheme = Scheme::mod17;
  cfg.n_sensors = 10;
  cfg.n_channels = 2;
  cfg.mod17.tau = 40.0;
  cfg.mod17.s_measure = 5.0;
  cfg.slots = 400;

  RunArtifacts art = run_episode(cfg, true);
  for (std::size_t k = 0; k < art.v_post.size(); ++k) {
    CHECK(std::fabs(art.v_post[k] - art.v_prior[k]) <=
          1e-4 * art.v_prior[k]);
    CHECK(art.snr_realized[k] == 0.0);
  }
  CHECK(art.point.per_sn_cost == 1.25);  // sensing only: phi * s_measure
  CHECK(art.point.collisions_per_slot == 0.0);
  CHECK(art.v_post.back() > 0.999);
}

TEST_CASE("censoring baseline: zero threshold is a plain filter update") {
  SimConfig cfg;
  cfg.scheme = Scheme::mod17;
  cfg.n_sensors = 1;
  cfg.n_channels = 1;
  cfg.mod17.tau = 0.0;
  cfg.mod17.s_measure = 5.0;
  cfg.slots = 300;

  RunArtifacts art = run_episode(cfg, true);
  double snr_one = local_snr(1.0, 20.0, 5.0);
  CHECK(snr_one == 4.0);
  for (std::size_t k = 0; k < art.v_post.size(); ++k) {
    double kalman = posterior_update(art.v_prior[k], snr_one);
    CHECK(std::fabs(art.v_post[k] - kalman) <= 1e-3);
    CHECK(art.snr_realized[k] == 4.0);
  }
  CHECK(art.point.per_sn_cost == 2.25);  // phi * s_measure + c_tx, every slot
  CHECK(art.point.collisions_per_slot == 0.0);
}

TEST_CASE("censoring budget tuning maximizes the delivered-snr objective") {
  const double sa = 20.0;
  const int b = 5;
  const int n = 100;
  for (double per_sn : {0.05, 0.1, 0.2}) {
    double eps = per_sn * n;
    Mod17Design design = mod17_tune(eps, kBaseCost, sa, b, n);
    CHECK(design.s_measure > 0.0);
    CHECK(design.q > 0.0);
    CHECK(design.q <= static_cast<double>(b) / n + 1e-12);

    // Dense reference search: the objective grows in both knobs, so the
    // budget binds and each axis scan pins the other knob from it.
    auto objective = [&](double q, double s) {
      if (q <= 0.0 || s <= 0.0) return 0.0;
      return q * n * std::exp(-q * n / b) * sa * s / (sa + s);
    };
    double budget = eps / n;
    double best = 0.0;
    int grid = 400;
    for (int i = 1; i <= grid; ++i) {
      double s = (budget / kBaseCost.phi) * i / (grid + 1);
      double q = std::min((budget - kBaseCost.phi * s) / kBaseCost.c_tx,
                          static_cast<double>(b) / n);
      best = std::max(best, objective(q, s));
      double q2 = (static_cast<double>(b) / n) * i / grid;
      double s2 = (budget - kBaseCost.c_tx * q2) / kBaseCost.phi;
      best = std::max(best, objective(q2, s2));
    }
    INFO("per_sn=", per_sn, " tuned=", design.objective, " grid=", best);
    CHECK(design.objective >= best * (1.0 - 1e-4));

    double q_of_tau = std::erfc(design.tau / std::sqrt(2.0));
    CHECK(std::fabs(q_of_tau - design.q) <= 1e-10);
  }

  // A vanishing budget degrades gracefully instead of erroring out.
  Mod17Design tiny = mod17_tune(1e-9, kBaseCost, sa, b, n);
  CHECK(tiny.q >= 0.0);
  CHECK(tiny.s_measure >= 0.0);
  CHECK(tiny.objective < 1e-6);

  CHECK_THROWS_AS((void)mod17_tune(0.0, kBaseCost, sa, b, n),
                  std::invalid_argument);
}

TEST_CASE("config validation names the violated requirement") {
  auto message_of = [](const SimConfig& cfg) {
    try {
      cfg.validate();
    } catch (const std::invalid_argument& e) {
      return std::string(e.what());
    }
    return std::string();
  };

  SimConfig na;
  na.scheme = Scheme::na;
  na.zeta = 1.0;
  na.n_channels = 2;
  CHECK(message_of(na).find("single channel") != std::string::npos);
  na.n_channels = 1;
  na.zeta = -0.1;
  CHECK(message_of(na).find("zeta") != std::string::npos);

  SimConfig amp;
  amp.scheme = Scheme::amp;
  amp.n_channels = 1;
  amp.lagrange = -1.0;
  CHECK(message_of(amp).find("lagrange") != std::string::npos);

  SimConfig snr;
  snr.scheme = Scheme::coord_snr;
  snr.epsilon = 0.0;
  CHECK(message_of(snr).find("epsilon") != std::string::npos);

  SimConfig scdp;
  scdp.scheme = Scheme::scdp;
  CHECK(message_of(scdp).find("policy table") != std::string::npos);

  PolicyTable coord = constant_coord_policy(6.0, 0.96, 20.0, kBaseCost, 5);
  SimConfig wrong_kind;
  wrong_kind.scheme = Scheme::dec_dp;
  wrong_kind.table = &coord;
  CHECK(message_of(wrong_kind).find("kind") != std::string::npos);

  PolicyTable other = constant_coord_policy(6.0, 0.9, 20.0, kBaseCost, 5);
  SimConfig mismatched;
  mismatched.scheme = Scheme::coord_dp;
  mismatched.table = &other;  // solved at a different alpha
  CHECK(message_of(mismatched).find("different model parameters") !=
        std::string::npos);

  SimConfig few;
  few.scheme = Scheme::mod17;
  few.mod17.tau = 1.0;
  few.mod17.s_measure = 5.0;
  few.n_sensors = 3;
  few.n_channels = 5;
  CHECK(message_of(few).find("n_sensors >= n_channels") != std::string::npos);

  SimConfig nochain;
  nochain.scheme = Scheme::coord_snr;
  nochain.epsilon = 5.0;
  nochain.scenario = Scenario::markov;
  CHECK(message_of(nochain).find("accuracy chain") != std::string::npos);

  SimConfig sddp;
  sddp.scheme = Scheme::sddp;
  sddp.table = nullptr;
  // table check precedes the chain check
  CHECK(message_of(sddp).find("policy table") != std::string::npos);

  SimConfig nodesign;
  nodesign.scheme = Scheme::mod17;
  CHECK(message_of(nodesign).find("epsilon or an explicit design") !=
        std::string::npos);

  SimConfig zero;
  zero.slots = 0;
  CHECK(message_of(zero).find("slots") != std::string::npos);
  zero.slots = 1;
  zero.n_sensors = 0;
  CHECK(message_of(zero).find("n_sensors") != std::string::npos);

  Mod17Config even_grid;
  even_grid.grid_points = 200;
  CHECK_THROWS_AS(even_grid.validate(), std::invalid_argument);
  Mod17Config small_grid;
  small_grid.grid_points = 99;
  CHECK_THROWS_AS(small_grid.validate(), std::invalid_argument);
  Mod17Config bad_q;
  bad_q.q = 1.5;
  CHECK_THROWS_AS(bad_q.validate(), std::invalid_argument);
  Mod17Config flat;
  flat.grid_width = 0.0;
  CHECK_THROWS_AS(flat.validate(), std::invalid_argument);
}

TEST_CASE("scheme and scenario names round-trip") {
  const std::vector<std::pair<Scheme, std::string>> schemes{
      {Scheme::coord_dp, "coord-dp"},   {Scheme::dec_dp, "dec-dp"},
      {Scheme::coord_snr, "coord-snr"}, {Scheme::dec_snr, "dec-snr"},
      {Scheme::scdp, "scdp"},           {Scheme::sddp, "sddp"},
      {Scheme::mod17, "mod17"},         {Scheme::na, "na"},
      {Scheme::amp, "amp"},             {Scheme::mp, "mp"}};
  for (const auto& [s, name] : schemes) {
    CHECK(scheme_name(s) == name);
    CHECK(parse_scheme(name) == s);
  }
  for (Scenario s : {Scenario::best, Scenario::iid, Scenario::markov}) {
    CHECK(parse_scenario(scenario_name(s)) == s);
  }
  CHECK_THROWS_AS((void)parse_scheme("bogus"), std::invalid_argument);
  CHECK_THROWS_AS((void)parse_scenario(""), std::invalid_argument);
}

TEST_CASE("sweeps patch exactly one knob and share the seed") {
  SimConfig base;
  base.scheme = Scheme::dec_snr;
  base.n_sensors = 30;
  base.slots = 15000;
  base.seed = 5;

  std::vector<double> grid{2.0, 5.0, 9.0};
  std::vector<TradeoffPoint> pts = sweep_tradeoff(base, "epsilon", grid);
  REQUIRE(pts.size() == 3);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(pts[i].knob_kind == "epsilon");
    CHECK(pts[i].knob_value == grid[i]);
    CHECK(pts[i].scheme == "dec-snr");
    CHECK(pts[i].scenario == "best");
    CHECK(pts[i].seed == 5);
    CHECK(pts[i].slots == 15000);
  }
  CHECK(pts[0].mse > pts[1].mse);
  CHECK(pts[1].mse > pts[2].mse);
  CHECK(pts[0].network_cost < pts[2].network_cost);

  std::vector<TradeoffPoint> par = sweep_tradeoff(base, "epsilon", grid, 3);
  REQUIRE(par.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same_point(pts[i], par[i]));

  SimConfig na;
  na.scheme = Scheme::na;
  na.n_sensors = 50;
  na.n_channels = 1;
  na.alpha = 0.95;
  na.slots = 15000;
  std::vector<TradeoffPoint> zp = sweep_tradeoff(na, "zeta", {0.5, 1.0});
  CHECK(zp[0].knob_value == 0.5);
  CHECK(zp[1].knob_kind == "zeta");

  CHECK_THROWS_AS((void)sweep_tradeoff(base, "zeta", {0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)sweep_tradeoff(base, "lagrange", {0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)sweep_tradeoff(base, "budget", {0.5}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)sweep_tradeoff(base, "epsilon", {}),
                  std::invalid_argument);

  // The lagrange knob on a table scheme solves the table per point.
  SimConfig dd;
  dd.scheme = Scheme::dec_dp;
  dd.n_sensors = 30;
  dd.slots = 20000;
  dd.dp = reduced_options();
  std::vector<TradeoffPoint> lp = sweep_tradeoff(dd, "lagrange", {0.3, 0.6});
  REQUIRE(lp.size() == 2);
  CHECK(lp[0].knob_kind == "lagrange");
  CHECK(lp[0].network_cost > lp[1].network_cost);
  CHECK(lp[0].mse < lp[1].mse);
}

TEST_CASE("cost matching tunes the price to the requested spend") {
  SimConfig cfg;
  cfg.scheme = Scheme::dec_dp;
  cfg.n_sensors = 40;
  cfg.slots = 20000;
  cfg.dp = reduced_options();

  TableCache cache;
  RunArtifacts art = match_network_cost(cfg, 3.0, cache, 0.01,
                                        reduced_options());
  CHECK(std::fabs(art.point.network_cost - 3.0) <= 0.03);
  CHECK(art.point.scheme == "dec-dp");
  CHECK(cache.dec.size() >= 1);

  // A repeat against the warm cache solves nothing new.
  std::size_t solved = cache.dec.size();
  RunArtifacts again = match_network_cost(cfg, 3.0, cache, 0.01,
                                          reduced_options());
  CHECK(cache.dec.size() == solved);
  CHECK(again.point.mse == art.point.mse);

  CHECK_THROWS_AS((void)match_network_cost(cfg, 1e6, cache, 0.01,
                                           reduced_options()),
                  std::runtime_error);
  CHECK_THROWS_AS((void)match_network_cost(cfg, -1.0, cache, 0.01,
                                           reduced_options()),
                  std::invalid_argument);

  SimConfig fixed;
  fixed.scheme = Scheme::coord_snr;
  fixed.epsilon = 5.0;
  CHECK_THROWS_AS((void)match_network_cost(fixed, 3.0, cache, 0.01,
                                           reduced_options()),
                  std::invalid_argument);

  const PolicyTable* p1 = cache.get(PolicyKind::decentralized, 0.3, 0.96,
                                    20.0, kBaseCost, 5, reduced_options());
  const PolicyTable* p2 = cache.get(PolicyKind::decentralized, 0.3, 0.96,
                                    20.0, kBaseCost, 5, reduced_options());
  CHECK(p1 == p2);
  const PolicyTable* p3 = cache.get(PolicyKind::decentralized, 0.6, 0.96,
                                    20.0, kBaseCost, 5, reduced_options());
  CHECK(p3 != p1);
  CHECK(p1->lagrange == 0.3);
}

TEST_CASE("trade-off rows survive the csv round trip") {
  SimConfig base;
  base.scheme = Scheme::dec_snr;
  base.n_sensors = 25;
  base.slots = 8000;
  base.seed = 17;
  std::vector<TradeoffPoint> pts = sweep_tradeoff(base, "epsilon", {3.0, 7.0});

  SimConfig na;
  na.scheme = Scheme::na;
  na.n_sensors = 30;
  na.n_channels = 1;
  na.alpha = 0.95;
  na.zeta = 0.8;
  na.slots = 8000;
  pts.push_back(run_episode(na).point);

  std::ostringstream out;
  write_tradeoff_csv(out, pts);
  std::istringstream in(out.str());
  std::vector<TradeoffPoint> back = read_tradeoff_csv(in);
  REQUIRE(back.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(same_point(pts[i], back[i]));
  }

  std::string text = out.str();
  text.replace(text.find("network_cost"), 12, "total_budget");
  std::istringstream bad(text);
  CHECK_THROWS_AS((void)read_tradeoff_csv(bad), std::runtime_error);
}

TEST_CASE("outage counts the slots whose variance clears the threshold") {
  SimConfig cfg;
  cfg.scheme = Scheme::coord_snr;
  cfg.n_sensors = 20;
  cfg.epsilon = 1.0 + std::sqrt(5.0);
  cfg.slots = 100000;

  RunArtifacts low = run_episode(cfg);
  CHECK(low.point.outage == 0.0);  // the posterior starts below 0.2 already

  cfg.outage_threshold = 0.1;
  RunArtifacts mid = run_episode(cfg, true);
  long above = 0;
  for (double v : mid.v_post) {
    if (v >= 0.1) ++above;
  }
  CHECK(mid.point.outage ==
        static_cast<double>(above) / static_cast<double>(cfg.slots));
  CHECK(mid.point.outage > 0.0);
  CHECK(mid.point.outage < 0.001);
}

TEST_CASE("recorded trajectories align with the scalar summaries") {
  PolicyTable dec = dec_dp_solve(0.3, 0.96, 20.0, kBaseCost, 5,
                                 reduced_options());
  SimConfig cfg;
  cfg.scheme = Scheme::dec_dp;
  cfg.n_sensors = 50;
  cfg.table = &dec;
  cfg.slots = 30000;
  cfg.seed = 21;

  RunArtifacts art = run_episode(cfg, true);
  REQUIRE(art.v_prior.size() == 30000);
  REQUIRE(art.v_post.size() == 30000);
  REQUIRE(art.snr_realized.size() == 30000);

  CHECK(mean_of(art.v_post) == doctest::Approx(art.point.mse).epsilon(1e-9));
  long above = 0;
  double worst = 0.0;
  for (std::size_t k = 0; k < art.v_post.size(); ++k) {
    if (art.v_post[k] >= cfg.outage_threshold) ++above;
    CHECK_MESSAGE(art.v_post[k] <= art.v_prior[k] + 1e-15, "fusing can't hurt");
    if (k > 0) {
      worst = std::max(worst, std::fabs(art.v_prior[k] -
                                        prior_update(art.v_post[k - 1], 0.96)));
    }
  }
  CHECK(worst == 0.0);
  CHECK(art.point.outage ==
        static_cast<double>(above) / static_cast<double>(cfg.slots));

  // Accuracy variation plus a chain is accepted in either varying scenario.
  AccuracyChain chain = AccuracyChain::preset_paper_v();
  cfg.scenario = Scenario::markov;
  cfg.chain = &chain;
  cfg.slots = 20000;
  RunArtifacts mk = run_episode(cfg);
  CHECK(mk.point.mse > 0.0);
  CHECK(mk.point.mse < 1.0);
  CHECK(mk.point.scenario == "markov");
  CHECK(mk.point.mse > art.point.mse - 3.0 * (mk.mse_se + art.mse_se));
}
