#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace rdslab {

/// Finite-state stationary Markov driving chain.
///
/// Houses the driving process: transition matrix P, unique stationary law pi
/// (irreducibility is required at construction) and the reversed transitions
/// Q(j,i) = pi_i P(i,j) / pi_j used by past-conditioned recursions.
struct SymbolChain {
  std::vector<std::string> states;
  Eigen::MatrixXd P;        // row-stochastic
  Eigen::VectorXd pi;       // stationary law, all entries > 0
  Eigen::MatrixXd reverse;  // time-reversed transition matrix Q
  bool iid = false;         // all rows of P identical

  int size() const { return static_cast<int>(states.size()); }
};

/// Mixing coefficients of the chain for n = 1..n_max, plus a fitted
/// stretched-exponential rate alpha_n <= c1 * exp(-c2 * n^eta).
struct MixingProfile {
  std::vector<double> alpha;         // alpha_n, index 0 <-> n = 1
  std::vector<double> phi_reverse;   // phi_{n,R}
  std::vector<double> psi;           // psi_n
  bool alpha_is_upper_bound = false; // true when m > 20 forced the phi fallback
};

struct MixingRateFit {
  double c1 = 0.0;
  double c2 = 0.0;
  double eta = std::numeric_limits<double>::infinity();  // infinity <=> all-zero profile
  double gamma = 0.0;                                    // 1 / eta
  double residual = 0.0;                                 // rms residual of the winning fit
  bool all_zero = false;
};

/// Validate P, solve pi P = pi, detect iid rows.
/// Throws NonStochastic (row sum off by > 1e-9) or Reducible.
SymbolChain build_chain(const Eigen::MatrixXd& P, std::vector<std::string> states = {});

/// psi_n = max_{i,j} |P^n(i,j)/pi_j - 1|.
double mixing_psi(const SymbolChain& chain, int n);

/// phi_{n,R} = max_j TV(Q^n(j,.), pi): reverse phi-dependence coefficient.
double mixing_phi_reverse(const SymbolChain& chain, int n);

/// alpha_n = max_{A,B subsets} |sum_{i in A, j in B} pi_i (P^n(i,j) - pi_j)|.
/// Brute force over subset pairs; throws StateSpaceTooLarge for m > 20 unless
/// allow_upper_bound is set, in which case phi_{n,R} is returned instead.
double mixing_alpha(const SymbolChain& chain, int n, bool allow_upper_bound = false);

/// All three coefficient sequences for n = 1..n_max.
MixingProfile mixing_profile(const SymbolChain& chain, int n_max);

/// Stationary path: w_0 ~ pi, w_{t+1} ~ P(w_t, .); deterministic given seed.
std::vector<int> sample_path(const SymbolChain& chain, int n, std::uint64_t seed);

/// Least-squares fit of ln(alpha_n) against n^eta over the eta grid
/// {0.25, 0.5, ..., 2.0}; requires >= 8 nonzero entries unless all are zero,
/// in which case the all_zero sentinel (eta = inf, gamma = 0) is returned.
MixingRateFit fit_mixing_rate(const std::vector<double>& coefficients);

}  // namespace rdslab
