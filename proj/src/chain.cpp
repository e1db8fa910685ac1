#include "rdslab/chain.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

namespace {

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& A, int n) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  for (int k = 0; k < n; ++k) out = out * A;
  return out;
}

// Strong connectivity of the support graph of P via forward+backward reach.
bool strongly_connected(const Eigen::MatrixXd& P) {
  const int m = static_cast<int>(P.rows());
  auto reach = [&](bool transpose) {
    std::vector<char> seen(static_cast<std::size_t>(m), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w = 0; w < m; ++w) {
        double edge = transpose ? P(w, v) : P(v, w);
        if (edge > 0.0 && !seen[static_cast<std::size_t>(w)]) {
          seen[static_cast<std::size_t>(w)] = 1;
          stack.push_back(w);
        }
      }
    }
    return std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; });
  };
  return reach(false) && reach(true);
}

}  // namespace

SymbolChain build_chain(const Eigen::MatrixXd& P, std::vector<std::string> states) {
  const int m = static_cast<int>(P.rows());
  if (m < 1 || P.cols() != m)
    throw Error(ErrorCode::NonStochastic, "transition matrix must be square and nonempty");
  for (int i = 0; i < m; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < m; ++j) {
      if (P(i, j) < 0.0)
        throw Error(ErrorCode::NonStochastic, "negative entry in row " + std::to_string(i));
      row_sum += P(i, j);
    }
    if (std::abs(row_sum - 1.0) > 1e-9)
      throw Error(ErrorCode::NonStochastic,
                  "row " + std::to_string(i) + " sums to " + std::to_string(row_sum));
  }
  if (!strongly_connected(P))
    throw Error(ErrorCode::Reducible, "chain has no unique stationary vector");

  // Solve pi (P - I) = 0 with the normalization sum(pi) = 1 appended.
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m + 1, m);
  A.topRows(m) = P.transpose() - Eigen::MatrixXd::Identity(m, m);
  A.bottomRows(1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m + 1);
  b(m) = 1.0;
  Eigen::VectorXd pi = A.colPivHouseholderQr().solve(b);

  if ((A.topRows(m) * pi).cwiseAbs().maxCoeff() > 1e-10 || pi.minCoeff() <= 0.0)
    throw Error(ErrorCode::Reducible, "stationary vector not unique or not positive");

  SymbolChain chain;
  chain.P = P;
  chain.pi = pi;
  if (states.empty()) {
    for (int i = 0; i < m; ++i) states.push_back("s" + std::to_string(i));
  } else if (static_cast<int>(states.size()) != m) {
    throw Error(ErrorCode::NonStochastic, "state label count does not match matrix size");
  }
  chain.states = std::move(states);

  chain.reverse.resize(m, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) chain.reverse(j, i) = pi(i) * P(i, j) / pi(j);

  chain.iid = true;
  for (int i = 1; i < m && chain.iid; ++i)
    if ((P.row(i) - P.row(0)).cwiseAbs().maxCoeff() > 1e-12) chain.iid = false;

  return chain;
}

double mixing_psi(const SymbolChain& chain, int n) {
  if (n < 1) throw Error(ErrorCode::OutOfRange, "n must be >= 1");
  Eigen::MatrixXd Pn = matrix_power(chain.P, n);
  double best = 0.0;
  for (int i = 0; i < chain.size(); ++i)
    for (int j = 0; j < chain.size(); ++j)
      best = std::max(best, std::abs(Pn(i, j) / chain.pi(j) - 1.0));
  return best;
}

double mixing_phi_reverse(const SymbolChain& chain, int n) {
  if (n < 1) throw Error(ErrorCode::OutOfRange, "n must be >= 1");
  Eigen::MatrixXd Qn = matrix_power(chain.reverse, n);
  double best = 0.0;
  for (int j = 0; j < chain.size(); ++j) {
    double tv = 0.0;
    for (int i = 0; i < chain.size(); ++i) tv += std::abs(Qn(j, i) - chain.pi(i));
    best = std::max(best, 0.5 * tv);
  }
  return best;
}

double mixing_alpha(const SymbolChain& chain, int n, bool allow_upper_bound) {
  if (n < 1) throw Error(ErrorCode::OutOfRange, "n must be >= 1");
  const int m = chain.size();
  if (m > 20) {
    if (allow_upper_bound) return mixing_phi_reverse(chain, n);
    throw Error(ErrorCode::StateSpaceTooLarge, "subset enumeration capped at m <= 20");
  }
  Eigen::MatrixXd D = matrix_power(chain.P, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) D(i, j) = chain.pi(i) * (D(i, j) - chain.pi(j));

  // For fixed B the optimal A collects the rows of one sign, so scanning
  // subsets B and splitting row sums by sign covers all 2^m x 2^m pairs.
  double best = 0.0;
  const std::uint32_t subsets = 1u << m;
  for (std::uint32_t B = 1; B < subsets; ++B) {
    double pos = 0.0, neg = 0.0;
    for (int i = 0; i < m; ++i) {
      double row = 0.0;
      for (int j = 0; j < m; ++j)
        if (B & (1u << j)) row += D(i, j);
      if (row > 0.0) pos += row;
      else neg -= row;
    }
    best = std::max({best, pos, neg});
  }
  return best;
}

MixingProfile mixing_profile(const SymbolChain& chain, int n_max) {
  MixingProfile profile;
  profile.alpha_is_upper_bound = chain.size() > 20;
  for (int n = 1; n <= n_max; ++n) {
    profile.alpha.push_back(mixing_alpha(chain, n, /*allow_upper_bound=*/true));
    profile.phi_reverse.push_back(mixing_phi_reverse(chain, n));
    profile.psi.push_back(mixing_psi(chain, n));
  }
  return profile;
}

std::vector<int> sample_path(const SymbolChain& chain, int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::OutOfRange, "path length must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<int> path(static_cast<std::size_t>(n));
  std::vector<double> probs(static_cast<std::size_t>(chain.size()));
  for (int i = 0; i < chain.size(); ++i) probs[static_cast<std::size_t>(i)] = chain.pi(i);
  path[0] = sample_categorical(probs, rng);
  for (int t = 1; t < n; ++t) {
    for (int j = 0; j < chain.size(); ++j)
      probs[static_cast<std::size_t>(j)] = chain.P(path[static_cast<std::size_t>(t - 1)], j);
    path[static_cast<std::size_t>(t)] = sample_categorical(probs, rng);
  }
  return path;
}

MixingRateFit fit_mixing_rate(const std::vector<double>& coefficients) {
  MixingRateFit fit;
  std::vector<std::pair<double, double>> points;  // (n, ln a_n)
  for (std::size_t k = 0; k < coefficients.size(); ++k)
    if (coefficients[k] > 0.0)
      points.emplace_back(static_cast<double>(k + 1), std::log(coefficients[k]));

  if (points.empty()) {
    fit.all_zero = true;
    fit.eta = std::numeric_limits<double>::infinity();
    fit.gamma = 0.0;
    return fit;
  }
  if (points.size() < 8)
    throw Error(ErrorCode::OutOfRange, "need >= 8 nonzero entries to fit a mixing rate");

  double best_rms = std::numeric_limits<double>::infinity();
  for (double eta = 0.25; eta <= 2.0 + 1e-12; eta += 0.25) {
    // least squares of y = ln c1 - c2 * n^eta
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [n, y] : points) {
      double x = std::pow(n, eta);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double count = static_cast<double>(points.size());
    double denom = count * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) continue;
    double slope = (count * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / count;
    double ss = 0.0;
    for (auto [n, y] : points) {
      double r = y - (intercept + slope * std::pow(n, eta));
      ss += r * r;
    }
    double rms = std::sqrt(ss / count);
    if (rms < best_rms) {
      best_rms = rms;
      fit.eta = eta;
      fit.c2 = -slope;
      fit.c1 = std::exp(intercept);
      fit.residual = rms;
    }
  }
  fit.gamma = 1.0 / fit.eta;
  return fit;
}

}  // namespace rdslab
