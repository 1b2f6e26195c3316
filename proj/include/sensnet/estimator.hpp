#pragma once

#include <span>
#include <vector>

namespace sensnet {

// Fusion-center belief about the tracked state at one slot. v_prior is the
// prediction variance before the slot's reports, v_post the variance after.
struct FcBelief {
  double x_hat = 0.0;
  double v_prior = 1.0;
  double v_post = 1.0;
};

// One successfully delivered observation: value, accuracy it was taken at,
// and its effective SNR.
struct Report {
  double y = 0.0;
  double gamma = 1.0;
  double snr = 0.0;
};

// Prediction step of the variance recursion: v -> 1 - alpha * (1 - v).
double prior_update(double v_post, double alpha);

// Correction step: v -> v / (1 + v * snr_total), clamped to [0, 1].
double posterior_update(double v_prior, double snr_total);

// Full one-slot belief update from the previous posterior belief and the
// slot's delivered reports. With no reports this is prediction only.
FcBelief fuse(const FcBelief& previous, std::span<const Report> reports,
              double alpha);

// Posterior-variance trajectory for a known SNR schedule, starting from the
// prior variance v0 at the first slot. Evaluated both by the scalar
// recursion and by an equivalent numerator/denominator ratio recursion; the
// two must agree to 1e-12 or the call throws.
std::vector<double> variance_trajectory(double v0, std::span<const double> snrs,
                                        double alpha);

// Mean of the posterior-variance trajectory over all slots.
double sample_average_mse(double v0, std::span<const double> snrs, double alpha);

// Steady-state posterior variance under a constant per-slot SNR x: the unique
// fixed point of v -> posterior_update(prior_update(v), x) on [0, 1].
double mse_floor(double snr_total, double alpha);

// Exact partial derivatives d v_post[k] / d snr[i] for i = 0..k. Every entry
// is strictly negative when alpha > 0 (more SNR anywhere never hurts).
std::vector<double> trajectory_gradient(double v0, std::span<const double> snrs,
                                        double alpha, int k);

// Fraction of slots whose posterior variance is at or above the threshold.
double outage_rate(std::span<const double> v_post, double v_threshold);

}  // namespace sensnet
