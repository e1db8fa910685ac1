#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "rdslab/chain.hpp"
#include "rdslab/grid.hpp"
#include "rdslab/maps.hpp"

namespace rdslab {

/// Transfer-operator cocycle: one piecewise-linear Markov map per chain
/// symbol, all sharing the base partition M, acting exactly on step functions
/// at resolution N (a multiple of M). Immutable after construction; transfer
/// matrices are cached per (symbol, resolution) behind a mutex.
class Cocycle {
 public:
  Cocycle(SymbolChain chain, std::vector<PiecewiseMap> maps, int resolution);
  Cocycle(Cocycle&&) = default;
  Cocycle& operator=(Cocycle&&) = default;

  const SymbolChain& chain() const { return chain_; }
  const PiecewiseMap& map(int symbol) const;
  int resolution() const { return resolution_; }
  int base_partition() const { return M_; }
  /// lcm of all branch slopes across symbols; one pullback step refines by it.
  int slope_lcm() const { return slope_lcm_; }
  int symbol_count() const { return static_cast<int>(maps_.size()); }
  bool uniformly_expanding() const;

  const Eigen::MatrixXd& transfer(int symbol, int resolution) const;

  /// Apply the transfer operator of one symbol.
  GridFunction apply_transfer(int symbol, const GridFunction& g) const;

 private:
  struct TransferCache {
    std::mutex mutex;
    std::map<std::pair<int, int>, Eigen::MatrixXd> entries;
  };

  SymbolChain chain_;
  std::vector<PiecewiseMap> maps_;
  int resolution_ = 0;
  int M_ = 0;
  int slope_lcm_ = 1;
  std::unique_ptr<TransferCache> cache_ = std::make_unique<TransferCache>();
};

/// L_{w_{n-1}} ... L_{w_1} L_{w_0} g, applied in path order; exact.
GridFunction push(const Cocycle& cocycle, std::span<const int> path, const GridFunction& g);

/// Finite-past approximation of the equivariant density: the pushforward of 1
/// along the past path (earliest symbol first). Integrates to 1 exactly.
GridFunction path_density(const Cocycle& cocycle, std::span<const int> past);

/// Normalized cocycle L_w^n g = L_w^n(g h_w) / h_{sigma^n w} with both
/// densities built from the same finite past, which makes L_w^n 1 = 1 and the
/// mean-transport identity hold exactly.
GridFunction normalized_push(const Cocycle& cocycle, std::span<const int> past,
                             std::span<const int> path, const GridFunction& g,
                             double positivity_floor = 1e-10);

struct DecaySeries {
  std::vector<double> n;       // horizons with data
  std::vector<double> median;  // median over sampled paths
  std::vector<double> q10;
  std::vector<double> q90;
  double K_est = 0.0;       // exp(intercept) of the log-linear fit
  double lambda_est = 0.0;  // minus slope
  double r_squared = 0.0;
  double envelope_K = 0.0;  // max_n median_n * exp(lambda_est n)
  bool identically_zero = false;
};

/// Exp1 experiment: || L_w^n 1 - h_{sigma^n w} ||_BV over sampled paths with
/// burn-in B = n_max + 20; fit only over entries above the exact-arithmetic
/// noise floor 1e-13.
DecaySeries decay_exp1(const Cocycle& cocycle, int n_max, int n_paths, std::uint64_t seed);

/// Exp2 experiment: || L_w^n g ||_BV for fiberwise-centered g along sampled
/// paths (same burn-in convention).
DecaySeries decay_exp2(const Cocycle& cocycle, const GridFunction& g, int n_max, int n_paths,
                       std::uint64_t seed);

struct TemperednessReport {
  double tail_statistic = 0.0;  // max over tail of |ln K(sigma^t w)| / t
  double epsilon = 0.0;         // threshold lambda_est / 3
  bool tempered = false;
};

/// Verdict for (1/t) ln K(sigma^t w) -> 0 against epsilon = lambda/3,
/// evaluated over the second half of the series.
TemperednessReport temperedness_check(std::span<const double> K_series, double lambda_est);

/// Per-shift envelope constants K(sigma^t w) = sup_n ||L^n 1 - h||_BV e^{lambda n}
/// along one long sampled path.
std::vector<double> estimate_K_along_shifts(const Cocycle& cocycle, int shifts, int n_max,
                                            double lambda_est, std::uint64_t seed);

/// Log-linear least squares on entries above `floor`; returns
/// (intercept, slope, r_squared, n_used).
struct LogLinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  int points = 0;
};
LogLinearFit fit_log_linear(std::span<const double> n, std::span<const double> values, double floor);

}  // namespace rdslab
