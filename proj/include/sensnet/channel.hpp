#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <span>
#include <vector>

namespace sensnet {

using BigInt = boost::multiprecision::cpp_int;

// Outcome of one slot on a multi-channel collision medium: a transmission is
// delivered iff it is the sole occupant of its channel.
struct SlotOutcome {
  std::vector<int> delivered;  // indices into the transmission list
  int attempts = 0;
  int collided_channels = 0;   // channels holding two or more transmissions
};

// channel_choice[i] in [0, n_channels) is transmitter i's channel pick.
SlotOutcome resolve_slot(std::span<const int> channel_choice, int n_channels);

// Number of ways t labeled transmitters can pick among b labeled channels so
// that no transmission is delivered. Exact integers; cached for t, b <= 64,
// computed on demand (still exact) above that.
BigInt unsuccessful_combinations(int t, int b);

// Same count via the alternating-sum closed form, in the same integer domain.
BigInt unsuccessful_combinations_closed_form(int t, int b);

// P(r of t transmissions delivered | t transmitters, b channels), r = 0..b.
std::vector<double> conditional_delivery_pmf(int t, int n_channels);

// PMF of the number of delivered reports when each of n_sensors transmits
// independently with probability q and picks its channel uniformly.
// Evaluated by the closed-form alternating sum.
std::vector<double> exact_success_pmf(int n_sensors, int n_channels, double q);

// Same distribution by mixing conditional_delivery_pmf over the binomial
// transmitter count. Slower; used to cross-check the closed form.
std::vector<double> exact_success_pmf_by_conditioning(int n_sensors,
                                                      int n_channels, double q);

// Exhaustive enumeration over activation sets and channel assignments.
// Feasible only for small n_sensors / n_channels.
std::vector<double> brute_force_pmf(int n_sensors, int n_channels, double q);

// Large-population limit at normalized load zeta = q * n_sensors / n_channels:
// deliveries are Binomial(n_channels, zeta * exp(-zeta)).
std::vector<double> binomial_approx_pmf(double zeta, int n_channels);

}  // namespace sensnet
