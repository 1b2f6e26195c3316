#include "sensnet/channel.hpp"

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace sensnet {

namespace mp = boost::multiprecision;
using BigRational = mp::cpp_rational;

SlotOutcome resolve_slot(std::span<const int> channel_choice, int n_channels) {
  if (n_channels < 1) {
    throw std::invalid_argument("resolve_slot: need at least one channel");
  }
  SlotOutcome out;
  out.attempts = static_cast<int>(channel_choice.size());
  std::vector<int> occupancy(n_channels, 0);
  for (int c : channel_choice) {
    if (c < 0 || c >= n_channels) {
      throw std::invalid_argument("resolve_slot: channel index out of range");
    }
    ++occupancy[c];
  }
  for (std::size_t i = 0; i < channel_choice.size(); ++i) {
    if (occupancy[channel_choice[i]] == 1) {
      out.delivered.push_back(static_cast<int>(i));
    }
  }
  for (int c = 0; c < n_channels; ++c) {
    if (occupancy[c] >= 2) ++out.collided_channels;
  }
  return out;
}

namespace {

BigInt big_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  BigInt result = 1;
  for (int i = 0; i < k; ++i) {
    result *= (n - i);
    result /= (i + 1);
  }
  return result;
}

BigInt falling_factorial(int n, int k) {
  BigInt result = 1;
  for (int i = 0; i < k; ++i) result *= (n - i);
  return result;
}

constexpr int kTableLimit = 64;

// all_collide_count(t, b): assignments of t transmitters to b channels with
// no channel holding exactly one. Base cases: zero transmitters always
// qualify; one transmitter never does; with one channel only t == 1 fails.
BigInt all_collide_uncached(int t, int b);

const std::vector<std::vector<BigInt>>& collide_table() {
  static std::vector<std::vector<BigInt>> table;
  static std::once_flag once;
  std::call_once(once, [] {
    table.assign(kTableLimit + 1, std::vector<BigInt>(kTableLimit + 1));
    for (int t = 0; t <= kTableLimit; ++t) {
      table[t][0] = (t == 0) ? 1 : 0;
      if (kTableLimit >= 1) table[t][1] = (t == 1) ? 0 : 1;
    }
    for (int b = 2; b <= kTableLimit; ++b) {
      for (int t = 0; t <= kTableLimit; ++t) {
        BigInt acc = 0;
        for (int n = 0; n <= t; ++n) {
          if (n == 1) continue;
          acc += big_binomial(t, n) * table[t - n][b - 1];
        }
        table[t][b] = acc;
      }
    }
  });
  return table;
}

BigInt all_collide_uncached(int t, int b) {
  if (b == 0) return (t == 0) ? 1 : 0;
  if (b == 1) return (t == 1) ? 0 : 1;
  BigInt acc = 0;
  for (int n = 0; n <= t; ++n) {
    if (n == 1) continue;
    acc += big_binomial(t, n) * unsuccessful_combinations(t - n, b - 1);
  }
  return acc;
}

}  // namespace

BigInt unsuccessful_combinations(int t, int b) {
  if (t < 0 || b < 0) {
    throw std::invalid_argument("unsuccessful_combinations: negative argument");
  }
  if (t <= kTableLimit && b <= kTableLimit) return collide_table()[t][b];
  return all_collide_uncached(t, b);
}

BigInt unsuccessful_combinations_closed_form(int t, int b) {
  if (t < 0 || b < 0) {
    throw std::invalid_argument("unsuccessful_combinations: negative argument");
  }
  if (b == 0) return (t == 0) ? 1 : 0;
  BigInt acc = 0;
  int kmax = std::min(t, b - 1);
  for (int k = 0; k <= kmax; ++k) {
    BigInt term = big_binomial(b, k) * falling_factorial(t, k) *
                  mp::pow(BigInt(b - k), static_cast<unsigned>(t - k));
    if (k % 2 == 0) {
      acc += term;
    } else {
      acc -= term;
    }
  }
  if (t == b) {
    BigInt fact = 1;
    for (int i = 2; i <= b; ++i) fact *= i;
    if (b % 2 == 0) {
      acc += fact;
    } else {
      acc -= fact;
    }
  }
  return acc;
}

std::vector<double> conditional_delivery_pmf(int t, int n_channels) {
  if (t < 0 || n_channels < 1) {
    throw std::invalid_argument("conditional_delivery_pmf: bad arguments");
  }
  const int b = n_channels;
  std::vector<double> pmf(b + 1, 0.0);
  BigInt denom = mp::pow(BigInt(b), static_cast<unsigned>(t));
  for (int r = 0; r <= std::min(b, t); ++r) {
    BigInt num = big_binomial(b, r) * falling_factorial(t, r) *
                 unsuccessful_combinations(t - r, b - r);
    pmf[r] = BigRational(num, denom).convert_to<double>();
  }
  return pmf;
}

std::vector<double> exact_success_pmf(int n_sensors, int n_channels, double q) {
  if (n_sensors < 1 || n_channels < 1) {
    throw std::invalid_argument("exact_success_pmf: need sensors and channels");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("exact_success_pmf: q must lie in [0, 1]");
  }
  const int b = n_channels;
  const int ns = n_sensors;
  std::vector<double> pmf(b + 1, 0.0);
  for (int r = 0; r <= b; ++r) {
    long double acc = 0.0L;
    for (int k = r; k <= std::min(b, ns); ++k) {
      long double coef =
          static_cast<long double>(falling_factorial(ns, k).convert_to<double>()) *
          static_cast<long double>(big_binomial(b, r).convert_to<double>()) *
          static_cast<long double>(big_binomial(b - r, k - r).convert_to<double>());
      long double base = 1.0L - static_cast<long double>(k) * q / b;
      if (base < 0.0L) base = 0.0L;  // rounding dust when k q == b
      long double term = coef *
                         std::pow(static_cast<long double>(q) / b, k) *
                         std::pow(base, ns - k);
      acc += ((k - r) % 2 == 0) ? term : -term;
    }
    pmf[r] = static_cast<double>(acc < 0.0L ? 0.0L : acc);
  }
  return pmf;
}

std::vector<double> exact_success_pmf_by_conditioning(int n_sensors,
                                                      int n_channels, double q) {
  if (n_sensors < 1 || n_channels < 1) {
    throw std::invalid_argument("exact_success_pmf: need sensors and channels");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("exact_success_pmf: q must lie in [0, 1]");
  }
  std::vector<double> pmf(n_channels + 1, 0.0);
  for (int t = 0; t <= n_sensors; ++t) {
    long double weight;
    if (q == 0.0) {
      weight = (t == 0) ? 1.0L : 0.0L;
    } else if (q == 1.0) {
      weight = (t == n_sensors) ? 1.0L : 0.0L;
    } else {
      long double log_w = std::lgamma(static_cast<long double>(n_sensors) + 1) -
                          std::lgamma(static_cast<long double>(t) + 1) -
                          std::lgamma(static_cast<long double>(n_sensors - t) + 1) +
                          t * std::log(static_cast<long double>(q)) +
                          (n_sensors - t) * std::log1p(-static_cast<long double>(q));
      weight = std::exp(log_w);
    }
    if (weight == 0.0L) continue;
    auto cond = conditional_delivery_pmf(t, n_channels);
    for (int r = 0; r <= n_channels; ++r) {
      pmf[r] += static_cast<double>(weight * cond[r]);
    }
  }
  return pmf;
}

std::vector<double> brute_force_pmf(int n_sensors, int n_channels, double q) {
  if (n_sensors < 1 || n_channels < 1) {
    throw std::invalid_argument("brute_force_pmf: need sensors and channels");
  }
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("brute_force_pmf: q must lie in [0, 1]");
  }
  if (n_sensors > 12 || n_channels > 4) {
    throw std::invalid_argument("brute_force_pmf: instance too large to enumerate");
  }

  std::vector<double> pmf(n_channels + 1, 0.0);
  std::vector<int> choice;
  for (int t = 0; t <= n_sensors; ++t) {
    // Exact delivery counts over all n_channels^t assignments of t senders.
    std::vector<double> counts(n_channels + 1, 0.0);
    choice.assign(t, 0);
    while (true) {
      SlotOutcome outcome = resolve_slot(choice, n_channels);
      counts[outcome.delivered.size()] += 1.0;
      int pos = t - 1;
      while (pos >= 0 && choice[pos] == n_channels - 1) {
        choice[pos] = 0;
        --pos;
      }
      if (pos < 0) break;
      ++choice[pos];
    }
    double activation = big_binomial(n_sensors, t).convert_to<double>() *
                        std::pow(q, t) * std::pow(1.0 - q, n_sensors - t);
    double total = std::pow(static_cast<double>(n_channels), t);
    for (int r = 0; r <= n_channels; ++r) {
      pmf[r] += activation * counts[r] / total;
    }
  }
  return pmf;
}

std::vector<double> binomial_approx_pmf(double zeta, int n_channels) {
  if (n_channels < 1) {
    throw std::invalid_argument("binomial_approx_pmf: need channels");
  }
  if (!(zeta >= 0.0)) {
    throw std::invalid_argument("binomial_approx_pmf: zeta must be >= 0");
  }
  double p = zeta * std::exp(-zeta);
  std::vector<double> pmf(n_channels + 1, 0.0);
  for (int r = 0; r <= n_channels; ++r) {
    pmf[r] = big_binomial(n_channels, r).convert_to<double>() *
             std::pow(p, r) * std::pow(1.0 - p, n_channels - r);
  }
  return pmf;
}

}  // namespace sensnet
