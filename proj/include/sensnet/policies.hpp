#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "sensnet/process.hpp"

namespace sensnet {

// Per-slot cost of one active sensor: c_tx + phi * s_measure (sense + report).
struct CostModel {
  double c_tx = 1.0;
  double phi = 0.25;

  void validate() const;
  double theta() const { return phi / c_tx; }
  double active_cost(double s_measure) const { return c_tx + phi * s_measure; }
};

struct CostMse {
  double per_sn_cost = 0.0;
  double mse = 0.0;
};

// ============================================================================
// Single-channel motivating schemes (noiseless observations, one channel).
// The age j counts consecutive slots without a delivered observation.
// ============================================================================

// Stationary cost/MSE of the non-adaptive scheme at normalized load zeta.
CostMse na_closed_form(double zeta, double alpha, int n_sensors,
                       double c_tx = 1.0);

// Myopic load: minimizes (1 - zeta e^-zeta) (1 - alpha^(j+1)) + lagrange*zeta.
double mp_zeta(int age, double lagrange, double alpha);

// Upper concave envelope of the myopic rule: [1 - lagrange/(1-alpha^(j+1))]+.
double amp_zeta(int age, double lagrange, double alpha);

// Stationary cost/MSE of the adaptive rule, summed over the age chain.
// Requires lagrange in (0, 1); outside that range the chain either never
// transmits or the truncated tail cannot be certified.
CostMse amp_stationary_metrics(double lagrange, double alpha, int n_sensors,
                               double c_tx = 1.0);

// ============================================================================
// Coordinated SNR allocation and budget-constrained designs.
// ============================================================================

// Aggregate-SNR boundary above which the cheapest realization uses more than
// t active sensors.
double snr_threshold(int t, double s_ambient, double theta);

struct SnrAllocation {
  int t_active = 0;
  double s_measure = 0.0;
};

// Cheapest (t, s_measure) realizing aggregate SNR snr_total with every active
// sensor at top accuracy: t = 0 at zero SNR, otherwise the unique t with
// snr_total in [snr_threshold(t-1), snr_threshold(t)), capped at n_channels.
SnrAllocation snr_allocation(double snr_total, double s_ambient, double theta,
                             int n_channels);

struct CoordinatedDesign {
  double m_bar = 0.0;      // average active sensors per slot
  bool time_sharing = false;  // m_bar fractional: mix floor/ceil slot counts
  double s_measure = 0.0;
  double lambda_bar = 0.0;  // best attainable average aggregate SNR
};

// Highest average aggregate SNR affordable with per-slot network budget
// epsilon under collision-free scheduling.
CoordinatedDesign max_snr_coordinated(double epsilon, const CostModel& cost,
                                      double s_ambient, int n_channels);

struct DecentralizedDesign {
  double zeta = 0.0;
  double s_measure = 0.0;
  double lambda_bar = 0.0;  // average delivered SNR under the binomial model
};

// Highest average delivered SNR for random-access reporting under the same
// budget: maximizes B zeta e^-zeta * Sa Sm/(Sa+Sm) s.t.
// B zeta (c_tx + phi Sm) <= epsilon.
DecentralizedDesign max_snr_decentralized(double epsilon, const CostModel& cost,
                                          double s_ambient, int n_channels);

// Steady-state MSE floor no scheme can beat at network budget epsilon:
// the constant-SNR fixed point at the best coordinated average SNR.
double mse_lower_bound(double epsilon, const CostModel& cost, double s_ambient,
                       int n_channels, double alpha);

// ============================================================================
// Lagrangian dynamic programs over the prior-variance grid.
// ============================================================================

struct DpOptions {
  int v_cells = 2001;
  int iterations = 100;
  int snr_points = 400;        // coordinated grid (the idle action is extra)
  int zeta_points = 201;
  int s_measure_points = 200;  // decentralized grid (zero point is extra)
  bool refine = true;          // golden-section polish around the grid argmin
  bool record_history = false; // keep per-iteration mean-free value snapshots
};

enum class PolicyKind { coordinated, decentralized };

struct PolicyTable {
  PolicyKind kind = PolicyKind::coordinated;
  double lagrange = 0.0;
  double alpha = 0.96;
  double s_ambient = 20.0;
  CostModel cost;
  int n_channels = 5;
  int iterations = 0;
  std::vector<double> v_grid;
  std::vector<double> value;
  std::vector<double> snr_action;        // coordinated: aggregate SNR target
  std::vector<double> zeta_action;       // decentralized: normalized load
  std::vector<double> s_measure_action;  // decentralized: per-report SNR knob
  // Mean-free value snapshots per iteration when record_history is set.
  std::vector<std::vector<double>> history;

  int cell_at(double v_prior) const;
  double coord_action(double v_prior) const;
  std::pair<double, double> dec_action(double v_prior) const;

  void write_csv(std::ostream& os) const;
  static PolicyTable read_csv(std::istream& is);
  static PolicyTable read_csv_file(const std::string& path);
};

PolicyTable coord_dp_solve(double lagrange, double alpha, double s_ambient,
                           const CostModel& cost, int n_channels,
                           const DpOptions& options = {});

PolicyTable dec_dp_solve(double lagrange, double alpha, double s_ambient,
                         const CostModel& cost, int n_channels,
                         const DpOptions& options = {});

// Degenerate coordinated table that always requests the same aggregate SNR;
// lets fixed designs run through the table-driven simulation paths.
PolicyTable constant_coord_policy(double snr_total, double alpha,
                                  double s_ambient, const CostModel& cost,
                                  int n_channels);

// ============================================================================
// Accuracy-aware wrappers around the best-accuracy tables.
// ============================================================================

struct ScdpStep {
  std::vector<int> active;     // top-accuracy sensors, ties broken by index
  double s_measure = 0.0;
  double snr_target = 0.0;     // table action driving the virtual recursion
  double v_virtual_next = 1.0;
};

// Rank sensors by accuracy and hand the table's allocation to the best ones;
// the virtual prior advances by the target SNR regardless of realized gammas.
ScdpStep scdp_schedule(const PolicyTable& table, double v_virtual,
                       std::span<const double> gammas);

struct SddpRule {
  std::vector<double> activation;  // per accuracy state
  int threshold_state = 0;
};

// Accuracy-threshold activation matching the marginal load: full activation
// above the threshold state, fractional at it, zero below, chosen so that
// sum_g activation[g] pi[g] * n_sensors / n_channels = zeta.
SddpRule sddp_rule(double zeta, std::span<const double> stationary,
                   int n_sensors, int n_channels);

// Analytic bound on the MSE excess of accuracy-ranked scheduling over the
// all-top-accuracy ideal; valid when n_sensors >= (n_channels-1)/pi_top.
double scdp_gap_bound(double alpha, double pi_top, int n_sensors,
                      int n_channels);

// ============================================================================
// Idealized finite-horizon SNR schedule at a per-slot budget.
// ============================================================================

struct SnrSchedule {
  std::vector<double> snrs;   // length horizon_T + 1, sums to budget*(T+1)
  double sample_mse = 0.0;    // mean posterior variance from prior 1
  int tail_zeros = 0;
  double snr_first = 0.0;
  double snr_mid = 0.0;
  double snr_close = 0.0;
};

// Front-loaded schedule minimizing the sample-average MSE subject to the
// average-SNR budget: a large opening value, a constant run, one closing
// value, then idle slots.
SnrSchedule optimal_snr_sequence(double snr_budget, double alpha,
                                 int horizon_T);

// ============================================================================
// Signaling overhead.
// ============================================================================

struct OverheadCosts {
  double uplink_per_slot = 0.0;
  double downlink_per_slot = 0.0;
};

// Coordinated operation pays uplink accuracy updates (whenever a sensor's
// state moved) and a downlink schedule of avg_active entries; decentralized
// operation only needs the prior variance broadcast.
OverheadCosts overhead_costs(bool coordinated, const AccuracyChain& chain,
                             std::span<const double> stationary, int n_sensors,
                             double c_gamma, double c_v, double c_schedule,
                             double avg_active);

}  // namespace sensnet
