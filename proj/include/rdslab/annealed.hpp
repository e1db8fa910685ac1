#pragma once

#include <Eigen/Dense>
#include <memory>
#include <vector>

#include "rdslab/cocycle.hpp"
#include "rdslab/fields.hpp"

namespace rdslab {

struct VarianceResult {
  double s2 = 0.0;
  double tail_bound = 0.0;   // bound on 2 * sum_{k > n_tail} |b_k| from the geometric envelope
  double fitted_rate = 0.0;  // fitted |b_k| decay ratio
  int n_tail = 0;
};

struct MomentsResult {
  int n = 0;
  std::vector<double> moments;    // moments[p] = E[S_n^p], p = 0..p_max
  std::vector<double> cumulants;  // cumulants[k] = Gamma_k(S_n), k = 0..p_max (index 0 unused)
};

struct MultiCorrelationResult {
  double lhs = 0.0;                  // |E prod G_j - prod E G_j|
  std::vector<int> r;                // r_j = floor(d_j / 3) per gap
  std::vector<double> alpha_r;       // chain alpha at r_j (alpha_0 := 1)
  double product_of_expectations = 0.0;
  double joint_expectation = 0.0;
};

struct CovarianceResult {
  Eigen::MatrixXd sigma2;
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;      // columns
  std::vector<int> null_directions;  // indices of eigenvalues < 1e-8
};

struct ProductSlot {
  int time = 0;
  const SymbolField* observable = nullptr;
};

/// Exact annealed calculus for one cocycle. Everything routes through the
/// symbol-conditioned density hhat(s) = E[h_w | w_0 = s], the fixed point of
///   pi_{s'} hhat(s') = sum_s pi_s P(s,s') L_s hhat(s),
/// reached by iterating the reverse-chain recursion from the constant 1.
/// Under Markov driving the conditional fiber density given (w_j)_{j>=0} is
/// exactly hhat(w_0), which turns every annealed expectation into finite
/// linear algebra on step functions.
class AnnealedSystem {
 public:
  /// Borrowing constructor: the cocycle must outlive the system.
  explicit AnnealedSystem(const Cocycle& cocycle, double fixpoint_tol = 1e-12,
                          int max_iterations = 10000);
  /// Owning constructor for temporaries.
  explicit AnnealedSystem(Cocycle&& cocycle, double fixpoint_tol = 1e-12,
                          int max_iterations = 10000);

  const Cocycle& cocycle() const { return *cocycle_; }
  const SymbolField& conditioned_density() const { return hhat_; }
  double fixpoint_residual() const { return fixpoint_residual_; }
  int fixpoint_iterations() const { return fixpoint_iterations_; }

  double expectation(const SymbolField& f) const;
  double expectation(const PairField& f) const;

  /// Subtract the annealed mean (a single scalar) from the field.
  SymbolField centered(const SymbolField& f) const;

  /// E_mu [ prod_t phi_t o tau^t ] over the given time slots (strictly
  /// increasing times >= 0). Exact forward recursion over symbol-indexed
  /// weighted densities. Throws HorizonTooLarge beyond max(J) = 60.
  double product_expectation(const std::vector<ProductSlot>& slots) const;

  /// Autocovariance b_k = E[phi * (phi o tau^k)] for a centered observable.
  /// Routes through the same recursion as product_expectation; k is capped at
  /// 500 here (the public 60-cap guards only arbitrary multi-slot products).
  double correlation(const SymbolField& phi, int k) const;

  /// b_0 + 2 sum_{k<=n_tail} b_k with a geometric tail bound fitted from the
  /// computed entries. Entries below 1e-15 end the summation early.
  VarianceResult asymptotic_variance(const SymbolField& phi, int n_tail) const;
  std::vector<double> correlation_series(const SymbolField& phi, int k_max) const;

  /// Exact E[S_n^2] assembled from the autocovariances by stationarity.
  double exact_sn2(const std::vector<double>& b, int n) const;

  /// Exact E[S_n^p] for p <= p_max (<= 6) via the moment-propagation
  /// recursion (binomial multiply-by-phi-powers before each push), and
  /// cumulants from the moment-to-cumulant recursion. n capped at 500.
  MomentsResult moments_cumulants(const SymbolField& phi, int n, int p_max) const;

  /// lhs and envelope data for blocks B_1..B_m (disjoint, ordered, total span
  /// <= 60): lhs = |E prod_j G_j - prod_j E G_j| with G_j = prod_{i in B_j}
  /// phi o tau^i; each factor is exact.
  MultiCorrelationResult multi_correlation(const SymbolField& phi,
                                           const std::vector<std::vector<int>>& blocks) const;

  /// Polarization Sigma^2_{ij} = (s_{e_i+e_j}^2 - s_{e_i}^2 - s_{e_j}^2)/2
  /// with eigen-decomposition and coboundary-candidate (null) directions.
  CovarianceResult covariance_matrix(const std::vector<SymbolField>& components, int n_tail) const;

 private:
  double product_expectation_impl(const std::vector<ProductSlot>& slots) const;
  void solve_fixpoint(double fixpoint_tol, int max_iterations);

  std::unique_ptr<Cocycle> owned_;  // set only by the owning constructor
  const Cocycle* cocycle_;
  SymbolField hhat_;
  double fixpoint_residual_ = 0.0;
  int fixpoint_iterations_ = 0;
};

/// phi(s, x) = r(T_s x) - r(x): an exact coboundary r o tau - r for a state
/// function r, realized as a symbol field on the one-step refined grid.
/// Its asymptotic variance vanishes (S_n telescopes).
SymbolField coboundary_observable(const Cocycle& cocycle, const GridFunction& r);

/// Brute-force oracle: sum over all symbol paths of path probability times
/// the exact fiber integral. Exponential in the horizon; used by tests and
/// the acceptance suite as the independent route.
double product_expectation_enumeration(const AnnealedSystem& system,
                                       const std::vector<ProductSlot>& slots);

/// Brute-force oracle for E[S_n^p]: expands the power into time tuples and
/// sums product_expectation_enumeration over them.
double moment_enumeration(const AnnealedSystem& system, const SymbolField& phi, int n, int p);

}  // namespace rdslab
