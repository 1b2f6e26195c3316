#include "sensnet/estimator.hpp"

#include <cmath>
#include <stdexcept>

namespace sensnet {

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("estimator: alpha must lie in [0, 1)");
  }
}

}  // namespace

double prior_update(double v_post, double alpha) {
  check_alpha(alpha);
  if (!(v_post >= 0.0 && v_post <= 1.0)) {
    throw std::invalid_argument("prior_update: v_post must lie in [0, 1]");
  }
  return 1.0 - alpha * (1.0 - v_post);
}

double posterior_update(double v_prior, double snr_total) {
  if (!(v_prior >= 0.0 && v_prior <= 1.0)) {
    throw std::invalid_argument("posterior_update: v_prior must lie in [0, 1]");
  }
  if (!(snr_total >= 0.0)) {
    throw std::invalid_argument("posterior_update: SNR must be nonnegative");
  }
  double v = v_prior / (1.0 + v_prior * snr_total);
  if (v < 0.0) v = 0.0;
  if (v > 1.0) v = 1.0;
  return v;
}

FcBelief fuse(const FcBelief& previous, std::span<const Report> reports,
              double alpha) {
  check_alpha(alpha);
  const double sqrt_alpha = std::sqrt(alpha);
  FcBelief next;
  next.v_prior = prior_update(previous.v_post, alpha);

  double snr_total = 0.0;
  double weighted = 0.0;
  for (const Report& r : reports) {
    if (!(r.snr >= 0.0)) throw std::invalid_argument("fuse: negative SNR");
    if (!(r.gamma > 0.0)) throw std::invalid_argument("fuse: gamma must be > 0");
    snr_total += r.snr;
    weighted += r.snr / r.gamma * r.y;
  }

  double predicted = sqrt_alpha * previous.x_hat;
  next.v_post = posterior_update(next.v_prior, snr_total);
  if (snr_total > 0.0) {
    double y_bar = weighted / snr_total;
    next.x_hat = predicted + snr_total * next.v_post * (y_bar - predicted);
  } else {
    next.x_hat = predicted;
  }
  return next;
}

namespace {

// Ratio recursion for the posterior variance: v_post[k] = n[k] / d[k] with
//   n[0] = v0,                 d[0] = 1 + v0 * snr[0],
//   n[k] = alpha n[k-1] + (1-alpha) d[k-1],
//   d[k] = alpha snr[k] n[k-1] + (1 + (1-alpha) snr[k]) d[k-1].
// The pair is renormalized to d = 1 each step; scale[k] = d[k-1]/d[k] tracks
// the discarded factor, which is all the gradient needs.
struct RatioTrajectory {
  std::vector<double> v_post;
  std::vector<double> scale;
};

RatioTrajectory ratio_trajectory(double v0, std::span<const double> snrs,
                                 double alpha) {
  RatioTrajectory out;
  out.v_post.reserve(snrs.size());
  out.scale.reserve(snrs.size());
  double d0 = 1.0 + v0 * snrs[0];
  out.v_post.push_back(v0 / d0);
  out.scale.push_back(1.0 / d0);
  for (std::size_t k = 1; k < snrs.size(); ++k) {
    double v = out.v_post.back();
    double n = alpha * v + (1.0 - alpha);
    double d = alpha * snrs[k] * v + 1.0 + (1.0 - alpha) * snrs[k];
    out.v_post.push_back(n / d);
    out.scale.push_back(1.0 / d);
  }
  return out;
}

}  // namespace

std::vector<double> variance_trajectory(double v0, std::span<const double> snrs,
                                        double alpha) {
  check_alpha(alpha);
  if (!(v0 >= 0.0 && v0 <= 1.0)) {
    throw std::invalid_argument("variance_trajectory: v0 must lie in [0, 1]");
  }
  if (snrs.empty()) return {};
  for (double s : snrs) {
    if (!(s >= 0.0)) {
      throw std::invalid_argument("variance_trajectory: negative SNR");
    }
  }

  std::vector<double> direct;
  direct.reserve(snrs.size());
  double v = posterior_update(v0, snrs[0]);
  direct.push_back(v);
  for (std::size_t k = 1; k < snrs.size(); ++k) {
    v = posterior_update(prior_update(v, alpha), snrs[k]);
    direct.push_back(v);
  }

  RatioTrajectory ratio = ratio_trajectory(v0, snrs, alpha);
  for (std::size_t k = 0; k < snrs.size(); ++k) {
    if (std::fabs(ratio.v_post[k] - direct[k]) > 1e-12) {
      throw std::runtime_error(
          "variance_trajectory: recursion and ratio form disagree");
    }
  }
  return direct;
}

double sample_average_mse(double v0, std::span<const double> snrs, double alpha) {
  if (snrs.empty()) {
    throw std::invalid_argument("sample_average_mse: empty schedule");
  }
  auto traj = variance_trajectory(v0, snrs, alpha);
  double acc = 0.0;
  for (double v : traj) acc += v;
  return acc / static_cast<double>(traj.size());
}

double mse_floor(double snr_total, double alpha) {
  check_alpha(alpha);
  if (!(snr_total >= 0.0)) {
    throw std::invalid_argument("mse_floor: SNR must be nonnegative");
  }
  const double b = 1.0 - alpha;
  // Rationalized root of alpha x v^2 + (b x + b) v - b = 0 picked on [0, 1];
  // this form stays stable as snr_total -> 0 (limit 1) and -> inf (limit 0).
  double disc = b * b * (1.0 + snr_total * snr_total) +
                2.0 * b * (1.0 + alpha) * snr_total;
  return 2.0 * b / (std::sqrt(disc) + b * (1.0 + snr_total));
}

std::vector<double> trajectory_gradient(double v0, std::span<const double> snrs,
                                        double alpha, int k) {
  check_alpha(alpha);
  if (k < 0 || static_cast<std::size_t>(k) >= snrs.size()) {
    throw std::invalid_argument("trajectory_gradient: k out of range");
  }
  if (!(v0 >= 0.0 && v0 <= 1.0)) {
    throw std::invalid_argument("trajectory_gradient: v0 must lie in [0, 1]");
  }
  for (double s : snrs) {
    if (!(s >= 0.0)) {
      throw std::invalid_argument("trajectory_gradient: negative SNR");
    }
  }
  RatioTrajectory traj = ratio_trajectory(v0, snrs, alpha);

  // d v_post[k] / d snr[i] = -alpha^(k-i) * (n[i] / d[k])^2 with
  // n[i]/d[k] = v_post[i] * prod_{j=i+1..k} scale[j].
  std::vector<double> grad(k + 1);
  double suffix = 1.0;
  for (int i = k; i >= 0; --i) {
    double ratio = traj.v_post[i] * suffix;
    grad[i] = -std::pow(alpha, k - i) * ratio * ratio;
    if (i > 0) suffix *= traj.scale[i];
  }
  return grad;
}

double outage_rate(std::span<const double> v_post, double v_threshold) {
  if (v_post.empty()) throw std::invalid_argument("outage_rate: empty input");
  std::size_t count = 0;
  for (double v : v_post) {
    if (v >= v_threshold) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(v_post.size());
}

}  // namespace sensnet
