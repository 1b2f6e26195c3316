#include "sensnet/process.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sensnet {

ProcessParams::ProcessParams(double a) : alpha(a) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("ProcessParams: alpha must lie in [0, 1)");
  }
}

double step_process(double x, const ProcessParams& params, Rng& rng) {
  std::normal_distribution<double> z(0.0, std::sqrt(params.sigma_z2()));
  return std::sqrt(params.alpha) * x + z(rng);
}

void AccuracyChain::validate() const {
  const int n = size();
  if (n == 0) throw std::invalid_argument("AccuracyChain: no states");
  if (static_cast<int>(transition.size()) != n) {
    throw std::invalid_argument("AccuracyChain: matrix is not square");
  }
  for (int i = 0; i < n; ++i) {
    if (!(states[i] > 0.0 && states[i] <= 1.0)) {
      throw std::invalid_argument("AccuracyChain: states must lie in (0, 1]");
    }
    if (i > 0 && !(states[i] > states[i - 1])) {
      throw std::invalid_argument("AccuracyChain: states must be ascending");
    }
  }
  if (std::fabs(states[n - 1] - 1.0) > 1e-12) {
    throw std::invalid_argument("AccuracyChain: top state must equal 1");
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(transition[i].size()) != n) {
      throw std::invalid_argument("AccuracyChain: matrix is not square");
    }
    double row_sum = 0.0;
    for (double p : transition[i]) {
      if (!(p >= 0.0)) {
        throw std::invalid_argument("AccuracyChain: negative probability");
      }
      row_sum += p;
    }
    if (std::fabs(row_sum - 1.0) > 1e-12) {
      throw std::invalid_argument("AccuracyChain: row does not sum to 1");
    }
  }
}

AccuracyChain AccuracyChain::preset_paper_v() {
  AccuracyChain chain;
  const int n = 10;
  chain.states.resize(n);
  for (int i = 0; i < n; ++i) {
    chain.states[i] = std::sqrt((i + 1) / 10.0);
  }
  chain.transition.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    chain.transition[i][i] = 0.9;
    if (i == 0) {
      chain.transition[i][1] = 0.1;
    } else if (i == n - 1) {
      chain.transition[i][n - 2] = 0.1;
    } else {
      chain.transition[i][i - 1] = 0.05;
      chain.transition[i][i + 1] = 0.05;
    }
  }
  chain.validate();
  return chain;
}

AccuracyChain AccuracyChain::load(const std::string& name_or_path) {
  if (name_or_path == "paper-v") return preset_paper_v();
  std::ifstream in(name_or_path);
  if (!in) {
    throw std::runtime_error("AccuracyChain: unknown preset or unreadable file: " +
                             name_or_path);
  }
  return parse(in);
}

AccuracyChain AccuracyChain::parse(std::istream& in) {
  AccuracyChain chain;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("AccuracyChain: empty chain file");
  }
  {
    std::istringstream ss(line);
    double v;
    while (ss >> v) chain.states.push_back(v);
  }
  const int n = static_cast<int>(chain.states.size());
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::vector<double> row;
    double v;
    while (ss >> v) row.push_back(v);
    if (row.empty()) continue;
    if (static_cast<int>(row.size()) != n) {
      throw std::runtime_error("AccuracyChain: row width differs from state count");
    }
    chain.transition.push_back(std::move(row));
  }
  chain.validate();
  return chain;
}

std::vector<double> stationary_distribution(const AccuracyChain& chain) {
  chain.validate();
  const int n = chain.size();
  if (n == 1) return {1.0};

  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      a(i, j) = chain.transition[j][i] - (i == j ? 1.0 : 0.0);
    }
  }
  // pi is unique iff P^T - I has a one-dimensional null space.
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  lu.setThreshold(1e-10);
  if (lu.rank() != n - 1) {
    throw std::runtime_error(
        "stationary_distribution: chain has no unique stationary law");
  }

  Eigen::MatrixXd sys(n + 1, n);
  sys.topRows(n) = a;
  sys.bottomRows(1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
  rhs(n) = 1.0;
  Eigen::VectorXd pi = sys.colPivHouseholderQr().solve(rhs);

  double residual = 0.0;
  for (int j = 0; j < n; ++j) {
    double row = 0.0;
    for (int i = 0; i < n; ++i) row += pi(i) * chain.transition[i][j];
    residual = std::max(residual, std::fabs(row - pi(j)));
  }
  if (residual > 1e-10) {
    // Damped power iteration as a fallback for ill-conditioned but valid chains.
    Eigen::VectorXd p = Eigen::VectorXd::Constant(n, 1.0 / n);
    for (long iter = 0; iter < 1000000; ++iter) {
      Eigen::VectorXd next(n);
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += p(i) * chain.transition[i][j];
        next(j) = acc;
      }
      next = 0.5 * (next + p);
      double delta = (next - p).lpNorm<Eigen::Infinity>();
      p = next;
      if (delta < 1e-12) break;
    }
    pi = p;
    residual = 0.0;
    for (int j = 0; j < n; ++j) {
      double row = 0.0;
      for (int i = 0; i < n; ++i) row += pi(i) * chain.transition[i][j];
      residual = std::max(residual, std::fabs(row - pi(j)));
    }
    if (residual > 1e-10) {
      throw std::runtime_error("stationary_distribution: solve did not certify");
    }
  }

  std::vector<double> out(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = std::max(pi(i), 0.0);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

int step_accuracy(const AccuracyChain& chain, int state, Rng& rng) {
  if (state < 0 || state >= chain.size()) {
    throw std::invalid_argument("step_accuracy: state index out of range");
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  const auto& row = chain.transition[state];
  double acc = 0.0;
  for (int j = 0; j < chain.size(); ++j) {
    acc += row[j];
    if (u < acc) return j;
  }
  return chain.size() - 1;
}

double measure(double x, double gamma, const MeasurementParams& params,
               Rng& rng) {
  if (!(params.s_ambient > 0.0)) {
    throw std::invalid_argument("measure: s_ambient must be positive");
  }
  if (!(params.s_measure > 0.0)) {
    throw std::invalid_argument("measure: s_measure must be positive");
  }
  std::normal_distribution<double> ambient(0.0, std::sqrt(1.0 / params.s_ambient));
  std::normal_distribution<double> device(0.0, std::sqrt(1.0 / params.s_measure));
  return gamma * x + ambient(rng) + device(rng);
}

double local_snr(double gamma, double s_ambient, double s_measure) {
  if (!(s_ambient > 0.0) || !(s_measure >= 0.0)) {
    throw std::invalid_argument("local_snr: SNR components must be nonnegative");
  }
  if (s_measure == 0.0) return 0.0;
  return gamma * gamma * s_ambient * s_measure / (s_ambient + s_measure);
}

}  // namespace sensnet
