#include "sensnet/policies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "sensnet/csv.hpp"
#include "sensnet/estimator.hpp"
#include "sensnet/math_util.hpp"

namespace sensnet {

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("policies: alpha must lie in [0, 1)");
  }
}

double nu(double v_post, double alpha) { return 1.0 - alpha * (1.0 - v_post); }

double nu_hat(double v_prior, double snr) {
  return v_prior / (1.0 + v_prior * snr);
}

double delivered_fraction(double zeta) { return zeta * std::exp(-zeta); }

}  // namespace

void CostModel::validate() const {
  if (!(c_tx > 0.0)) throw std::invalid_argument("CostModel: c_tx must be > 0");
  if (!(phi > 0.0)) throw std::invalid_argument("CostModel: phi must be > 0");
}

// ============================================================================
// Single-channel motivating schemes.
// ============================================================================

CostMse na_closed_form(double zeta, double alpha, int n_sensors, double c_tx) {
  check_alpha(alpha);
  if (n_sensors < 1) throw std::invalid_argument("na_closed_form: n_sensors");
  if (!(zeta >= 0.0 && zeta <= n_sensors)) {
    throw std::invalid_argument("na_closed_form: zeta must lie in [0, n_sensors]");
  }
  double p = delivered_fraction(zeta);
  CostMse out;
  out.per_sn_cost = zeta * c_tx / n_sensors;
  out.mse = (1.0 - alpha) * (1.0 - p) / (1.0 - alpha + alpha * p);
  return out;
}

namespace {

double age_weight(int age, double alpha) {
  // 1 - alpha^(age+1), the stationary MSE of an estimate that is `age+1`
  // slots stale.
  return 1.0 - std::pow(alpha, age + 1);
}

}  // namespace

double mp_zeta(int age, double lagrange, double alpha) {
  check_alpha(alpha);
  if (age < 0) throw std::invalid_argument("mp_zeta: age must be >= 0");
  if (!(lagrange >= 0.0)) throw std::invalid_argument("mp_zeta: lagrange");
  double k = age_weight(age, alpha);
  if (lagrange >= k) return 0.0;
  // e^-z (1 - z) k is strictly decreasing on [0, 1] from k to 0.
  return bisect_root(
      [&](double z) { return std::exp(-z) * (1.0 - z) * k - lagrange; }, 0.0,
      1.0, 1e-14);
}

double amp_zeta(int age, double lagrange, double alpha) {
  check_alpha(alpha);
  if (age < 0) throw std::invalid_argument("amp_zeta: age must be >= 0");
  if (!(lagrange >= 0.0)) throw std::invalid_argument("amp_zeta: lagrange");
  double z = 1.0 - lagrange / age_weight(age, alpha);
  return z > 0.0 ? z : 0.0;
}

CostMse amp_stationary_metrics(double lagrange, double alpha, int n_sensors,
                               double c_tx) {
  check_alpha(alpha);
  if (n_sensors < 1) {
    throw std::invalid_argument("amp_stationary_metrics: n_sensors");
  }
  if (!(lagrange > 0.0 && lagrange < 1.0)) {
    throw std::invalid_argument(
        "amp_stationary_metrics: lagrange must lie in (0, 1)");
  }

  // Unnormalized age-chain weights w[j+1] = w[j] * P(no delivery at age j).
  // The failure probability converges to 1 - p(1 - lagrange) < 1, so the tail
  // is eventually geometric and can be truncated with a certified bound.
  constexpr long kMaxAges = 10000000;
  double w = 1.0;
  double mass = 0.0, cost_sum = 0.0, mse_sum = 0.0;
  for (long j = 0; j < kMaxAges; ++j) {
    double z = amp_zeta(static_cast<int>(std::min<long>(j, 1 << 30)), lagrange,
                        alpha);
    double fail = 1.0 - delivered_fraction(z);
    double stale = age_weight(static_cast<int>(j), alpha);
    mass += w;
    cost_sum += w * z;
    mse_sum += w * fail * stale;
    double tail = (fail < 1.0) ? w * fail / (1.0 - fail) : HUGE_VAL;
    if (tail < 1e-12 * mass) {
      CostMse out;
      out.per_sn_cost = cost_sum / mass * c_tx / n_sensors;
      out.mse = mse_sum / mass;
      return out;
    }
    w *= fail;
  }
  throw std::runtime_error(
      "amp_stationary_metrics: age chain did not converge within the cap");
}

// ============================================================================
// Coordinated SNR allocation and budget-constrained designs.
// ============================================================================

double snr_threshold(int t, double s_ambient, double theta) {
  if (t < 0) throw std::invalid_argument("snr_threshold: t must be >= 0");
  if (!(s_ambient > 0.0) || !(theta > 0.0)) {
    throw std::invalid_argument("snr_threshold: need positive s_ambient, theta");
  }
  if (t == 0) return 0.0;
  double tt = static_cast<double>(t) * (t + 1);
  return 2.0 * s_ambient * tt /
         (std::sqrt(1.0 + 4.0 * s_ambient * theta * tt) + 2.0 * t + 1.0);
}

SnrAllocation snr_allocation(double snr_total, double s_ambient, double theta,
                             int n_channels) {
  if (n_channels < 1) throw std::invalid_argument("snr_allocation: n_channels");
  if (!(snr_total >= 0.0 && snr_total < n_channels * s_ambient)) {
    throw std::invalid_argument(
        "snr_allocation: snr_total must lie in [0, n_channels * s_ambient)");
  }
  SnrAllocation out;
  if (snr_total == 0.0) return out;  // idle: zero sensors, zero knob
  int t = 1;
  while (t < n_channels && snr_total >= snr_threshold(t, s_ambient, theta)) {
    ++t;
  }
  out.t_active = t;
  out.s_measure = s_ambient * snr_total / (t * s_ambient - snr_total);
  return out;
}

CoordinatedDesign max_snr_coordinated(double epsilon, const CostModel& cost,
                                      double s_ambient, int n_channels) {
  cost.validate();
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("max_snr_coordinated: epsilon must be > 0");
  }
  if (!(s_ambient > 0.0) || n_channels < 1) {
    throw std::invalid_argument("max_snr_coordinated: bad parameters");
  }
  const double theta = cost.theta();
  // Cost of one active sensor at the per-sensor optimal knob sqrt(Sa/theta).
  const double anchor = cost.c_tx * (1.0 + std::sqrt(theta * s_ambient));

  CoordinatedDesign out;
  if (epsilon > n_channels * anchor) {
    out.m_bar = n_channels;
    out.s_measure = (epsilon / (n_channels * cost.c_tx) - 1.0) / theta;
  } else {
    double m_real = epsilon / anchor;
    double m_round = std::round(m_real);
    if (m_round >= 1.0 && std::fabs(m_real - m_round) <= 1e-9 * m_real) {
      out.m_bar = m_round;
    } else {
      out.m_bar = m_real;
      out.time_sharing = true;
    }
    out.s_measure = std::sqrt(s_ambient / theta);
  }
  const double m = out.m_bar;
  out.lambda_bar = m * s_ambient * (epsilon - cost.c_tx * m) /
                   (m * (cost.phi * s_ambient - cost.c_tx) + epsilon);
  return out;
}

DecentralizedDesign max_snr_decentralized(double epsilon, const CostModel& cost,
                                          double s_ambient, int n_channels) {
  cost.validate();
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("max_snr_decentralized: epsilon must be > 0");
  }
  if (!(s_ambient > 0.0) || n_channels < 1) {
    throw std::invalid_argument("max_snr_decentralized: bad parameters");
  }
  const double b = n_channels;
  const double zeta_cap = std::min(1.0, epsilon / (b * cost.c_tx));

  // The knob that exhausts the budget at load zeta; the objective is strictly
  // increasing in s_measure, so the budget always binds at the optimum.
  auto knob = [&](double zeta) {
    return (epsilon / (b * zeta) - cost.c_tx) / cost.phi;
  };
  auto objective = [&](double zeta) {
    double sm = knob(zeta);
    if (sm <= 0.0) return 0.0;
    return b * delivered_fraction(zeta) * s_ambient * sm / (s_ambient + sm);
  };

  const int grid_n = 400;
  double best_z = zeta_cap, best_f = objective(zeta_cap);
  for (int i = 1; i <= grid_n; ++i) {
    double z = zeta_cap * i / grid_n;
    double f = objective(z);
    if (f > best_f) {
      best_f = f;
      best_z = z;
    }
  }
  double lo = std::max(zeta_cap / grid_n * 0.5, best_z - zeta_cap / grid_n);
  double hi = std::min(zeta_cap, best_z + zeta_cap / grid_n);
  double refined_f = 0.0;
  double refined_z = golden_min([&](double z) { return -objective(z); }, lo, hi,
                                &refined_f);
  DecentralizedDesign out;
  out.zeta = (-refined_f > best_f) ? refined_z : best_z;
  out.s_measure = std::max(knob(out.zeta), 0.0);
  out.lambda_bar = objective(out.zeta);
  return out;
}

double mse_lower_bound(double epsilon, const CostModel& cost, double s_ambient,
                       int n_channels, double alpha) {
  check_alpha(alpha);
  auto design = max_snr_coordinated(epsilon, cost, s_ambient, n_channels);
  return mse_floor(design.lambda_bar, alpha);
}

// ============================================================================
// Policy tables.
// ============================================================================

namespace {

void check_dp_inputs(double lagrange, double alpha, double s_ambient,
                     const CostModel& cost, int n_channels,
                     const DpOptions& opt) {
  cost.validate();
  check_alpha(alpha);
  if (!(lagrange >= 0.0)) throw std::invalid_argument("dp: lagrange must be >= 0");
  if (!(s_ambient > 0.0)) throw std::invalid_argument("dp: s_ambient must be > 0");
  if (n_channels < 1) throw std::invalid_argument("dp: n_channels must be >= 1");
  if (opt.v_cells < 2 || opt.iterations < 1 || opt.snr_points < 2 ||
      opt.zeta_points < 2 || opt.s_measure_points < 2) {
    throw std::invalid_argument("dp: bad grid options");
  }
}

}  // namespace

int PolicyTable::cell_at(double v_prior) const {
  const double lo = v_grid.front();
  const double hi = v_grid.back();
  const auto n = static_cast<long>(v_grid.size());
  double t = (v_prior - lo) / (hi - lo) * (n - 1);
  long i = std::lround(t);
  if (i < 0) i = 0;
  if (i >= n) i = n - 1;
  return static_cast<int>(i);
}

double PolicyTable::coord_action(double v_prior) const {
  if (kind != PolicyKind::coordinated) {
    throw std::logic_error("PolicyTable: not a coordinated table");
  }
  return snr_action[cell_at(v_prior)];
}

std::pair<double, double> PolicyTable::dec_action(double v_prior) const {
  if (kind != PolicyKind::decentralized) {
    throw std::logic_error("PolicyTable: not a decentralized table");
  }
  int i = cell_at(v_prior);
  return {zeta_action[i], s_measure_action[i]};
}

void PolicyTable::write_csv(std::ostream& os) const {
  CsvWriter w(os);
  w.comment("kind", kind == PolicyKind::coordinated ? "coordinated"
                                                    : "decentralized");
  w.comment("lagrange", lagrange);
  w.comment("alpha", alpha);
  w.comment("s_ambient", s_ambient);
  w.comment("c_tx", cost.c_tx);
  w.comment("phi", cost.phi);
  w.comment("b", static_cast<double>(n_channels));
  w.comment("iterations", static_cast<double>(iterations));
  if (kind == PolicyKind::coordinated) {
    w.header({"v", "value", "snr"});
    for (std::size_t i = 0; i < v_grid.size(); ++i) {
      w.row({format_double(v_grid[i]), format_double(value[i]),
             format_double(snr_action[i])});
    }
  } else {
    w.header({"v", "value", "zeta", "s_measure"});
    for (std::size_t i = 0; i < v_grid.size(); ++i) {
      w.row({format_double(v_grid[i]), format_double(value[i]),
             format_double(zeta_action[i]), format_double(s_measure_action[i])});
    }
  }
}

PolicyTable PolicyTable::read_csv(std::istream& is) {
  CsvDocument doc = sensnet::read_csv(is);
  auto need = [&](const std::string& key) -> std::string {
    auto it = doc.comments.find(key);
    if (it == doc.comments.end()) {
      throw std::runtime_error("PolicyTable: missing header field " + key);
    }
    return it->second;
  };
  PolicyTable t;
  std::string kind = need("kind");
  if (kind == "coordinated") {
    t.kind = PolicyKind::coordinated;
  } else if (kind == "decentralized") {
    t.kind = PolicyKind::decentralized;
  } else {
    throw std::runtime_error("PolicyTable: unknown kind " + kind);
  }
  t.lagrange = parse_double(need("lagrange"));
  t.alpha = parse_double(need("alpha"));
  t.s_ambient = parse_double(need("s_ambient"));
  t.cost.c_tx = parse_double(need("c_tx"));
  t.cost.phi = parse_double(need("phi"));
  t.n_channels = static_cast<int>(parse_double(need("b")));
  t.iterations = static_cast<int>(parse_double(need("iterations")));
  bool coord = t.kind == PolicyKind::coordinated;
  std::vector<std::string> expect =
      coord ? std::vector<std::string>{"v", "value", "snr"}
            : std::vector<std::string>{"v", "value", "zeta", "s_measure"};
  if (doc.header != expect) {
    throw std::runtime_error("PolicyTable: unexpected column layout");
  }
  for (const auto& row : doc.rows) {
    t.v_grid.push_back(parse_double(row[0]));
    t.value.push_back(parse_double(row[1]));
    if (coord) {
      t.snr_action.push_back(parse_double(row[2]));
    } else {
      t.zeta_action.push_back(parse_double(row[2]));
      t.s_measure_action.push_back(parse_double(row[3]));
    }
  }
  if (t.v_grid.size() < 2) throw std::runtime_error("PolicyTable: too few rows");
  return t;
}

PolicyTable PolicyTable::read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("PolicyTable: cannot open " + path);
  return read_csv(is);
}

PolicyTable constant_coord_policy(double snr_total, double alpha,
                                  double s_ambient, const CostModel& cost,
                                  int n_channels) {
  cost.validate();
  check_alpha(alpha);
  if (!(snr_total >= 0.0 && snr_total < n_channels * s_ambient)) {
    throw std::invalid_argument("constant_coord_policy: snr_total out of range");
  }
  PolicyTable t;
  t.kind = PolicyKind::coordinated;
  t.alpha = alpha;
  t.s_ambient = s_ambient;
  t.cost = cost;
  t.n_channels = n_channels;
  t.v_grid = {1.0 - alpha, 1.0};
  t.value = {0.0, 0.0};
  t.snr_action = {snr_total, snr_total};
  return t;
}

// ============================================================================
// Coordinated DP.
// ============================================================================

PolicyTable coord_dp_solve(double lagrange, double alpha, double s_ambient,
                           const CostModel& cost, int n_channels,
                           const DpOptions& opt) {
  check_dp_inputs(lagrange, alpha, s_ambient, cost, n_channels, opt);

  const double v_lo = 1.0 - alpha;
  const double v_hi = 1.0;
  std::vector<double> v_grid = lin_spaced(v_lo, v_hi, opt.v_cells);

  std::vector<double> actions;
  actions.push_back(0.0);
  double snr_max = n_channels * s_ambient * (1.0 - 1e-6);
  for (double a : log_spaced(1e-3, snr_max, opt.snr_points)) actions.push_back(a);
  const int na = static_cast<int>(actions.size());

  auto slot_penalty = [&](double snr) {
    if (snr <= 0.0) return 0.0;
    SnrAllocation alloc = snr_allocation(snr, s_ambient, cost.theta(), n_channels);
    return lagrange / cost.c_tx * alloc.t_active *
           cost.active_cost(alloc.s_measure);
  };
  std::vector<double> penalty(na);
  for (int a = 0; a < na; ++a) penalty[a] = slot_penalty(actions[a]);

  std::vector<double> w_prev(opt.v_cells, 0.0), w_next(opt.v_cells, 0.0);
  std::vector<double> act(opt.v_cells, 0.0);
  std::vector<double> buf(na);
  PolicyTable table;

  for (int iter = 0; iter < opt.iterations; ++iter) {
    for (int i = 0; i < opt.v_cells; ++i) {
      const double v = v_grid[i];
      auto stage = [&](double snr, double pen) {
        double vp = nu_hat(v, snr);
        return vp + pen + lerp_uniform(w_prev, v_lo, v_hi, nu(vp, alpha));
      };
      for (int a = 0; a < na; ++a) buf[a] = stage(actions[a], penalty[a]);
      double fmin = buf[0];
      for (int a = 1; a < na; ++a) fmin = std::min(fmin, buf[a]);
      int pick = 0;
      while (buf[pick] > fmin + 1e-12) ++pick;
      double best_f = buf[pick];
      double best_a = actions[pick];
      if (opt.refine && pick > 0) {
        double lo = actions[std::max(1, pick - 1)];
        double hi = actions[std::min(na - 1, pick + 1)];
        double fx = 0.0;
        double x = golden_min(
            [&](double s) { return stage(s, slot_penalty(s)); }, lo, hi, &fx);
        if (fx < best_f - 1e-15) {
          best_f = fx;
          best_a = x;
        }
      }
      w_next[i] = best_f;
      act[i] = best_a;
    }
    std::swap(w_prev, w_next);
    if (opt.record_history) {
      double mean = std::accumulate(w_prev.begin(), w_prev.end(), 0.0) /
                    static_cast<double>(opt.v_cells);
      std::vector<double> snap(opt.v_cells);
      for (int i = 0; i < opt.v_cells; ++i) snap[i] = w_prev[i] - mean;
      table.history.push_back(std::move(snap));
    }
  }

  table.kind = PolicyKind::coordinated;
  table.lagrange = lagrange;
  table.alpha = alpha;
  table.s_ambient = s_ambient;
  table.cost = cost;
  table.n_channels = n_channels;
  table.iterations = opt.iterations;
  table.v_grid = std::move(v_grid);
  table.value = std::move(w_prev);
  table.snr_action = std::move(act);
  return table;
}

// ============================================================================
// Decentralized DP.
// ============================================================================

namespace {

// obj[s][z] = pen[s][z] + sum_r g[s][r] * pmf[r][z]. The report count is a
// template parameter so the z loop vectorizes over contiguous pmf rows.
template <int NR>
void score_kernel(const double* g, const double* pen, const double* pmf,
                  double* obj, int ns, int nz) {
  for (int s = 0; s < ns; ++s) {
    const double* gs = g + static_cast<std::size_t>(s) * NR;
    const double* pe = pen + static_cast<std::size_t>(s) * nz;
    double* o = obj + static_cast<std::size_t>(s) * nz;
    for (int z = 0; z < nz; ++z) {
      double acc = pe[z];
      for (int r = 0; r < NR; ++r) {
        acc += gs[r] * pmf[static_cast<std::size_t>(r) * nz + z];
      }
      o[z] = acc;
    }
  }
}

// Eight independent lanes so the reduction turns into packed-min vectors
// instead of one serial dependence chain.
double row_minimum(const double* o, int n) {
  double m[8] = {o[0], o[0], o[0], o[0], o[0], o[0], o[0], o[0]};
  int n8 = n & ~7;
  for (int z = 0; z < n8; z += 8) {
    for (int l = 0; l < 8; ++l) m[l] = std::min(m[l], o[z + l]);
  }
  for (int z = n8; z < n; ++z) m[0] = std::min(m[0], o[z]);
  for (int l = 1; l < 8; ++l) m[0] = std::min(m[0], m[l]);
  return m[0];
}

void score_all(const double* g, const double* pen, const double* pmf,
               double* obj, int ns, int nz, int nr) {
  switch (nr) {
    case 2: return score_kernel<2>(g, pen, pmf, obj, ns, nz);
    case 3: return score_kernel<3>(g, pen, pmf, obj, ns, nz);
    case 4: return score_kernel<4>(g, pen, pmf, obj, ns, nz);
    case 5: return score_kernel<5>(g, pen, pmf, obj, ns, nz);
    case 6: return score_kernel<6>(g, pen, pmf, obj, ns, nz);
    case 7: return score_kernel<7>(g, pen, pmf, obj, ns, nz);
    case 8: return score_kernel<8>(g, pen, pmf, obj, ns, nz);
    case 9: return score_kernel<9>(g, pen, pmf, obj, ns, nz);
    default:
      for (int s = 0; s < ns; ++s) {
        double* o = obj + static_cast<std::size_t>(s) * nz;
        const double* pe = pen + static_cast<std::size_t>(s) * nz;
        for (int z = 0; z < nz; ++z) o[z] = pe[z];
        for (int r = 0; r < nr; ++r) {
          const double gr = g[static_cast<std::size_t>(s) * nr + r];
          const double* pr = pmf + static_cast<std::size_t>(r) * nz;
          for (int z = 0; z < nz; ++z) o[z] += gr * pr[z];
        }
      }
  }
}

}  // namespace

PolicyTable dec_dp_solve(double lagrange, double alpha, double s_ambient,
                         const CostModel& cost, int n_channels,
                         const DpOptions& opt) {
  check_dp_inputs(lagrange, alpha, s_ambient, cost, n_channels, opt);

  const double v_lo = 1.0 - alpha;
  const double v_hi = 1.0;
  std::vector<double> v_grid = lin_spaced(v_lo, v_hi, opt.v_cells);

  const int nz = opt.zeta_points;
  std::vector<double> z_grid = lin_spaced(0.0, 1.0, nz);
  std::vector<double> s_grid;
  s_grid.push_back(0.0);
  for (double s : log_spaced(1e-2, 1e3, opt.s_measure_points)) s_grid.push_back(s);
  const int ns = static_cast<int>(s_grid.size());
  const int nr = n_channels + 1;

  // Delivered-count PMF per load, laid out r-major for the accumulation loop.
  std::vector<double> pmf(static_cast<std::size_t>(nr) * nz);
  {
    std::vector<double> binom(nr);
    binom[0] = 1.0;
    for (int r = 1; r < nr; ++r) {
      binom[r] = binom[r - 1] * (n_channels - r + 1) / r;
    }
    for (int z = 0; z < nz; ++z) {
      double p = delivered_fraction(z_grid[z]);
      for (int r = 0; r < nr; ++r) {
        pmf[static_cast<std::size_t>(r) * nz + z] =
            binom[r] * std::pow(p, r) * std::pow(1.0 - p, n_channels - r);
      }
    }
  }

  // Lagrangian activation penalty per (s_measure, zeta), s-major.
  std::vector<double> pen(static_cast<std::size_t>(ns) * nz);
  for (int s = 0; s < ns; ++s) {
    double unit = lagrange * cost.active_cost(s_grid[s]) / cost.c_tx;
    for (int z = 0; z < nz; ++z) {
      pen[static_cast<std::size_t>(s) * nz + z] = unit * z_grid[z];
    }
  }

  std::vector<double> snr_unit(ns);  // delivered SNR of one report per knob
  for (int s = 0; s < ns; ++s) {
    snr_unit[s] =
        s_grid[s] > 0.0 ? s_ambient * s_grid[s] / (s_ambient + s_grid[s]) : 0.0;
  }

  std::vector<double> w_prev(opt.v_cells, 0.0), w_next(opt.v_cells, 0.0);
  std::vector<double> act_z(opt.v_cells, 0.0), act_s(opt.v_cells, 0.0);
  std::vector<double> g(static_cast<std::size_t>(ns) * nr);
  std::vector<double> obj(static_cast<std::size_t>(ns) * nz);
  std::vector<double> rp(nr);
  std::vector<double> row_min(ns);
  PolicyTable table;

  auto binom_pmf = [&](double zeta, double* out) {
    double p = delivered_fraction(zeta);
    double q1 = 1.0 - p;  // p <= 1/e, so q1 stays well away from zero
    double term = std::pow(q1, n_channels);
    double ratio = p / q1;
    double c = 1.0;
    out[0] = term;
    for (int r = 1; r < nr; ++r) {
      c = c * (n_channels - r + 1) / r;
      term *= ratio;
      out[r] = c * term;
    }
  };

  // Same arithmetic as lerp_uniform on the fixed grid, inlined: the value
  // lookup runs a few million times per iteration.
  const double cells1 = static_cast<double>(opt.v_cells - 1);
  for (int iter = 0; iter < opt.iterations; ++iter) {
    const double* w = w_prev.data();
    auto cont = [&](double x) {
      double t = (x - v_lo) / (v_hi - v_lo) * cells1;
      if (t <= 0.0) return w[0];
      if (t >= cells1) return w[opt.v_cells - 1];
      auto j = static_cast<std::size_t>(t);
      double frac = t - static_cast<double>(j);
      return w[j] + (w[j + 1] - w[j]) * frac;
    };
    for (int i = 0; i < opt.v_cells; ++i) {
      const double v = v_grid[i];
      auto head = [&](double snr) {
        double vp = nu_hat(v, snr);
        return vp + cont(nu(vp, alpha));
      };
      const double g0 = head(0.0);
      for (int s = 0; s < ns; ++s) {
        g[static_cast<std::size_t>(s) * nr] = g0;
        for (int r = 1; r < nr; ++r) {
          g[static_cast<std::size_t>(s) * nr + r] = head(r * snr_unit[s]);
        }
      }
      score_all(g.data(), pen.data(), pmf.data(), obj.data(), ns, nz, nr);
      for (int s = 0; s < ns; ++s) {
        row_min[s] = row_minimum(obj.data() + static_cast<std::size_t>(s) * nz,
                                 nz);
      }
      double fmin = *std::min_element(row_min.begin(), row_min.end());
      // Lexicographic (zeta, s_measure) pick among near-minimal cells; only
      // rows that can hold a winner get scanned.
      const double thr = fmin + 1e-12;
      int pick_z = nz, pick_s = 0;
      for (int s = 0; s < ns; ++s) {
        if (row_min[s] > thr) continue;
        const double* o = obj.data() + static_cast<std::size_t>(s) * nz;
        for (int z = 0; z < pick_z; ++z) {
          if (o[z] <= thr) {
            pick_z = z;
            pick_s = s;
            break;
          }
        }
      }
      double best_f = obj[static_cast<std::size_t>(pick_s) * nz + pick_z];
      double best_z = z_grid[pick_z];
      double best_s = s_grid[pick_s];

      if (opt.refine && (pick_z > 0 || pick_s > 0)) {
        // Polish the load with the knob pinned.
        if (pick_z > 0) {
          const double* gs = g.data() + static_cast<std::size_t>(pick_s) * nr;
          double unit = lagrange * cost.active_cost(best_s) / cost.c_tx;
          auto f_z = [&](double zeta) {
            binom_pmf(zeta, rp.data());
            double acc = unit * zeta;
            for (int r = 0; r < nr; ++r) acc += rp[r] * gs[r];
            return acc;
          };
          double lo = z_grid[std::max(0, pick_z - 1)];
          double hi = z_grid[std::min(nz - 1, pick_z + 1)];
          double fx = 0.0;
          double x = golden_min(f_z, lo, hi, &fx);
          if (fx < best_f - 1e-15) {
            best_f = fx;
            best_z = x;
          }
        }
        // Polish the knob with the load pinned.
        if (pick_s > 0) {
          binom_pmf(best_z, rp.data());
          auto f_s = [&](double sm) {
            double st = sm > 0.0 ? s_ambient * sm / (s_ambient + sm) : 0.0;
            double acc = lagrange * best_z * cost.active_cost(sm) / cost.c_tx;
            for (int r = 0; r < nr; ++r) acc += rp[r] * head(r * st);
            return acc;
          };
          double lo = s_grid[std::max(0, pick_s - 1)];
          double hi = s_grid[std::min(ns - 1, pick_s + 1)];
          double fx = 0.0;
          double x = golden_min(f_s, lo, hi, &fx);
          if (fx < best_f - 1e-15) {
            best_f = fx;
            best_s = x;
          }
        }
      }
      w_next[i] = best_f;
      act_z[i] = best_z;
      act_s[i] = best_s;
    }
    std::swap(w_prev, w_next);
    if (opt.record_history) {
      double mean = std::accumulate(w_prev.begin(), w_prev.end(), 0.0) /
                    static_cast<double>(opt.v_cells);
      std::vector<double> snap(opt.v_cells);
      for (int i = 0; i < opt.v_cells; ++i) snap[i] = w_prev[i] - mean;
      table.history.push_back(std::move(snap));
    }
  }

  table.kind = PolicyKind::decentralized;
  table.lagrange = lagrange;
  table.alpha = alpha;
  table.s_ambient = s_ambient;
  table.cost = cost;
  table.n_channels = n_channels;
  table.iterations = opt.iterations;
  table.v_grid = std::move(v_grid);
  table.value = std::move(w_prev);
  table.zeta_action = std::move(act_z);
  table.s_measure_action = std::move(act_s);
  return table;
}

// ============================================================================
// Accuracy-aware wrappers.
// ============================================================================

ScdpStep scdp_schedule(const PolicyTable& table, double v_virtual,
                       std::span<const double> gammas) {
  if (table.kind != PolicyKind::coordinated) {
    throw std::invalid_argument("scdp_schedule: needs a coordinated table");
  }
  ScdpStep step;
  step.snr_target = table.coord_action(v_virtual);
  SnrAllocation alloc = snr_allocation(step.snr_target, table.s_ambient,
                                       table.cost.theta(), table.n_channels);
  step.s_measure = alloc.s_measure;
  int want = std::min<int>(alloc.t_active, static_cast<int>(gammas.size()));
  if (want > 0) {
    std::vector<int> order(gammas.size());
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](int a, int b) {
      if (gammas[a] != gammas[b]) return gammas[a] > gammas[b];
      return a < b;
    };
    std::nth_element(order.begin(), order.begin() + want - 1, order.end(),
                     better);
    order.resize(want);
    std::sort(order.begin(), order.end(), better);
    step.active = std::move(order);
  }
  double vp = nu_hat(v_virtual, step.snr_target);
  step.v_virtual_next = nu(vp, table.alpha);
  return step;
}

SddpRule sddp_rule(double zeta, std::span<const double> stationary,
                   int n_sensors, int n_channels) {
  if (!(zeta >= 0.0 && zeta <= 1.0)) {
    throw std::invalid_argument("sddp_rule: zeta must lie in [0, 1]");
  }
  if (n_sensors < 1 || n_channels < 1) {
    throw std::invalid_argument("sddp_rule: bad sizes");
  }
  const int n = static_cast<int>(stationary.size());
  if (n == 0) throw std::invalid_argument("sddp_rule: empty distribution");
  double target = zeta * n_channels / n_sensors;  // marginal per-sensor load
  if (target > 1.0 + 1e-12) {
    throw std::invalid_argument(
        "sddp_rule: target activation exceeds 1; not enough sensors");
  }
  target = std::min(target, 1.0);

  SddpRule rule;
  rule.activation.assign(n, 0.0);
  double above = 0.0;  // mass strictly above the working threshold state
  int g = n - 1;
  while (g > 0 && above + stationary[g] < target) {
    above += stationary[g];
    --g;
  }
  rule.threshold_state = g;
  for (int j = g + 1; j < n; ++j) rule.activation[j] = 1.0;
  if (stationary[g] > 0.0) {
    rule.activation[g] =
        std::clamp((target - above) / stationary[g], 0.0, 1.0);
  }
  return rule;
}

double scdp_gap_bound(double alpha, double pi_top, int n_sensors,
                      int n_channels) {
  check_alpha(alpha);
  if (!(pi_top > 0.0 && pi_top <= 1.0)) {
    throw std::invalid_argument("scdp_gap_bound: pi_top must lie in (0, 1]");
  }
  if (n_sensors * pi_top < n_channels - 1) {
    throw std::invalid_argument(
        "scdp_gap_bound: requires n_sensors >= (n_channels - 1) / pi_top");
  }
  double npi = n_sensors * pi_top;
  double d = npi - n_channels + 1;
  return std::exp(-d * d / (2.0 * npi)) / (1.0 - alpha);
}

// ============================================================================
// Idealized finite-horizon schedule.
// ============================================================================

namespace {

// Opening-value breakpoint at which the closing slot of a schedule with m
// trailing idle slots degenerates to zero.
double opening_breakpoint(int m, double alpha) {
  double num = 1.0 - std::pow(alpha, m + 2);
  double den = 1.0 - std::pow(alpha, m + 1);
  return (std::sqrt(num / den) - 1.0) / (1.0 - alpha);
}

double mid_value(double snr0, double alpha) {
  return (1.0 - alpha) * snr0 * (1.0 + snr0) / (1.0 + (1.0 - alpha) * snr0);
}

double closing_value(double snr0, int m, double alpha) {
  double root = std::sqrt((1.0 - std::pow(alpha, m + 1)) *
                          ((1.0 + snr0) * (1.0 + snr0) - alpha * snr0 * snr0));
  double v = (1.0 + snr0) / (1.0 + (1.0 - alpha) * snr0) * (root - 1.0);
  return v > 0.0 ? v : 0.0;
}

}  // namespace

SnrSchedule optimal_snr_sequence(double snr_budget, double alpha,
                                 int horizon_T) {
  check_alpha(alpha);
  if (!(snr_budget > 0.0)) {
    throw std::invalid_argument("optimal_snr_sequence: budget must be > 0");
  }
  if (horizon_T < 0) {
    throw std::invalid_argument("optimal_snr_sequence: horizon must be >= 0");
  }
  const int T = horizon_T;
  const double total = snr_budget * (T + 1);

  // Smallest trailing-idle count m whose minimal affordable schedule fits the
  // budget; the left-hand side below is strictly decreasing in m.
  int m = 0;
  while (true) {
    double lhs = opening_breakpoint(m, alpha);
    int mids = std::max(T - m - 1, 0);
    if (mids > 0) lhs += mids * mid_value(opening_breakpoint(m, alpha), alpha);
    if (lhs / (T + 1) <= snr_budget) break;
    ++m;
  }

  SnrSchedule out;
  if (m >= T) {
    out.snrs.assign(T + 1, 0.0);
    out.snrs[0] = total;
    out.snr_first = total;
  } else {
    auto schedule_total = [&](double snr0) {
      return snr0 + (T - m - 1) * mid_value(snr0, alpha) +
             closing_value(snr0, m, alpha);
    };
    double lo = opening_breakpoint(m, alpha);
    double snr0;
    if (schedule_total(lo) >= total) {
      snr0 = lo;  // budget sits exactly on the breakpoint, up to rounding
    } else {
      double hi = std::max(lo * 2.0, 1.0);
      while (schedule_total(hi) < total) hi *= 2.0;
      snr0 = bisect_root([&](double x) { return schedule_total(x) - total; },
                         lo, hi, 1e-13 * std::max(1.0, total));
    }
    out.snr_first = snr0;
    out.snr_mid = mid_value(snr0, alpha);
    out.snr_close = closing_value(snr0, m, alpha);
    out.snrs.assign(T + 1, 0.0);
    out.snrs[0] = snr0;
    for (int k = 1; k <= T - m - 1; ++k) out.snrs[k] = out.snr_mid;
    out.snrs[T - m] = out.snr_close;
  }
  while (out.tail_zeros < T && out.snrs[T - out.tail_zeros] == 0.0) {
    ++out.tail_zeros;
  }
  out.sample_mse = sample_average_mse(1.0, out.snrs, alpha);
  return out;
}

// ============================================================================
// Signaling overhead.
// ============================================================================

OverheadCosts overhead_costs(bool coordinated, const AccuracyChain& chain,
                             std::span<const double> stationary, int n_sensors,
                             double c_gamma, double c_v, double c_schedule,
                             double avg_active) {
  chain.validate();
  if (static_cast<int>(stationary.size()) != chain.size()) {
    throw std::invalid_argument("overhead_costs: distribution size mismatch");
  }
  if (n_sensors < 1 || !(c_gamma >= 0.0) || !(c_v >= 0.0) ||
      !(c_schedule >= 0.0) || !(avg_active >= 0.0)) {
    throw std::invalid_argument("overhead_costs: bad parameters");
  }
  OverheadCosts out;
  if (coordinated) {
    double move_rate = 0.0;
    for (int i = 0; i < chain.size(); ++i) {
      move_rate += stationary[i] * (1.0 - chain.transition[i][i]);
    }
    out.uplink_per_slot = n_sensors * c_gamma * move_rate;
    out.downlink_per_slot = avg_active * c_schedule;
  } else {
    out.uplink_per_slot = 0.0;
    out.downlink_per_slot = c_v;
  }
  return out;
}

}  // namespace sensnet
