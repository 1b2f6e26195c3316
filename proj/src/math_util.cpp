#include "sensnet/math_util.hpp"

#include <cmath>
#include <stdexcept>

namespace sensnet {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double norm_cdf_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::invalid_argument("norm_cdf_inv: p must lie in (0, 1)");
  }
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200 && hi - lo > 1e-14 * (1.0 + std::fabs(lo)); ++i) {
    double mid = 0.5 * (lo + hi);
    (norm_cdf(mid) < p ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  // Newton polish; the density is strictly positive so this is safe.
  for (int i = 0; i < 3; ++i) {
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf < 1e-300) break;
    x -= (norm_cdf(x) - p) / pdf;
  }
  return x;
}

double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double* value, int iterations) {
  constexpr double inv_phi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - (b - a) * inv_phi;
  double d = a + (b - a) * inv_phi;
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iterations; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * inv_phi;
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * inv_phi;
      fd = f(d);
    }
  }
  double x = fc < fd ? c : d;
  if (value) *value = fc < fd ? fc : fd;
  return x;
}

double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol, int max_iter) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    throw std::invalid_argument("bisect_root: endpoints do not bracket a root");
  }
  for (int i = 0; i < max_iter && hi - lo > tol; ++i) {
    double mid = 0.5 * (lo + hi);
    double fmid = f(mid);
    if (fmid == 0.0) return mid;
    if ((fmid > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) {
    throw std::invalid_argument("log_spaced: need 0 < lo < hi and n >= 2");
  }
  std::vector<double> out(n);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i) {
    out[i] = std::exp(llo + (lhi - llo) * i / (n - 1));
  }
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> lin_spaced(double lo, double hi, int n) {
  if (n < 2) throw std::invalid_argument("lin_spaced: need n >= 2");
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * i / (n - 1);
  }
  out.back() = hi;
  return out;
}

double lerp_uniform(std::span<const double> y, double lo, double hi, double x) {
  if (y.size() < 2 || !(hi > lo)) {
    throw std::invalid_argument("lerp_uniform: bad grid");
  }
  const double n1 = static_cast<double>(y.size() - 1);
  double t = (x - lo) / (hi - lo) * n1;
  if (t <= 0.0) return y.front();
  if (t >= n1) return y.back();
  auto i = static_cast<std::size_t>(t);
  double frac = t - static_cast<double>(i);
  return y[i] + (y[i + 1] - y[i]) * frac;
}

}  // namespace sensnet
