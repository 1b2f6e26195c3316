#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sensnet/rng.hpp"

namespace sensnet {

// Scalar first-order autoregressive state with unit stationary variance:
//   x' = sqrt(alpha) * x + z,  z ~ N(0, 1 - alpha).
struct ProcessParams {
  double alpha = 0.96;

  explicit ProcessParams(double a);
  double sigma_z2() const { return 1.0 - alpha; }
};

double step_process(double x, const ProcessParams& params, Rng& rng);

// Finite Markov chain over sensing-accuracy states. States are strictly
// increasing in (0, 1] and the top state is exactly 1.
struct AccuracyChain {
  std::vector<double> states;
  std::vector<std::vector<double>> transition;

  int size() const { return static_cast<int>(states.size()); }
  void validate() const;

  // Ten-state ladder on sqrt(i/10), i = 1..10: every state keeps its value
  // with probability 0.9; the edge states move inward with probability 0.1,
  // interior states move one step up or down with probability 0.05 each.
  static AccuracyChain preset_paper_v();

  // Named preset lookup ("paper-v") or a path to a chain file.
  static AccuracyChain load(const std::string& name_or_path);

  // Text format: first line holds the state values, each following line one
  // transition-matrix row.
  static AccuracyChain parse(std::istream& in);
};

// Unique stationary distribution of the chain; throws if the chain does not
// have one (e.g. the identity matrix) or the solve does not certify
// ||pi P - pi||_inf <= 1e-10.
std::vector<double> stationary_distribution(const AccuracyChain& chain);

// One transition from state index `state`; returns the next state index.
int step_accuracy(const AccuracyChain& chain, int state, Rng& rng);

// Additive-noise observation y = gamma * x + w_a + w_m with independent
// zero-mean Gaussian terms of variance 1/s_ambient and 1/s_measure.
struct MeasurementParams {
  double s_ambient = 20.0;
  double s_measure = 0.0;
};

double measure(double x, double gamma, const MeasurementParams& params,
               Rng& rng);

// Effective observation SNR of one report: gamma^2 * Sa * Sm / (Sa + Sm).
// Strictly below gamma^2 * Sa for every finite Sm.
double local_snr(double gamma, double s_ambient, double s_measure);

}  // namespace sensnet
