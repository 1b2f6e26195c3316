#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace sensnet {

// Standard normal CDF.
double norm_cdf(double x);

// Inverse of norm_cdf, accurate to ~1e-13 (bisection + Newton polish).
double norm_cdf_inv(double p);

// Golden-section minimization of a unimodal function on [lo, hi].
// Returns the best abscissa; *value receives the best objective seen.
double golden_min(const std::function<double(double)>& f, double lo, double hi,
                  double* value = nullptr, int iterations = 80);

// Root of a monotone function on [lo, hi] by bisection; f(lo) and f(hi) must
// bracket zero.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double tol = 1e-12, int max_iter = 200);

// n points spaced logarithmically on [lo, hi], lo > 0.
std::vector<double> log_spaced(double lo, double hi, int n);

// n points spaced uniformly on [lo, hi].
std::vector<double> lin_spaced(double lo, double hi, int n);

// Piecewise-linear interpolation of y over the uniform grid [lo, hi].
// x is clamped to the grid range.
double lerp_uniform(std::span<const double> y, double lo, double hi, double x);

}  // namespace sensnet
