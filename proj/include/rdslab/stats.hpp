#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace rdslab {

/// Standard normal distribution function (tail-stable via erfc).
double normal_cdf(double x);
double normal_tail(double x);  // 1 - Phi(x)

/// Two-sided Kolmogorov-Smirnov distance of the sample against Phi.
/// The sample is copied and sorted internally.
double ks_distance_vs_normal(std::span<const double> sample);

/// DKW confidence radius sqrt(ln(2/alpha) / (2 n)).
double dkw_radius(std::size_t n, double alpha);

/// Regularized incomplete beta function I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// Clopper-Pearson binomial confidence bounds for k successes out of n at
/// one-sided level delta (e.g. 0.05 for a 95% one-sided bound).
double clopper_pearson_upper(std::int64_t k, std::int64_t n, double delta);
double clopper_pearson_lower(std::int64_t k, std::int64_t n, double delta);

double mean(std::span<const double> xs);
double variance(std::span<const double> xs);  // unbiased

/// Standard error of the mean estimated from `groups` contiguous batches;
/// honest for weakly dependent inputs as well.
double batch_se(std::span<const double> xs, int groups = 20);

/// p-th moment mean and its standard error (iid samples).
struct MomentEstimate {
  double value = 0.0;
  double se = 0.0;
};
MomentEstimate sample_moment(std::span<const double> xs, int p);

/// Empirical covariance of two samples with a batch-mean standard error.
struct CovarianceEstimate {
  double value = 0.0;
  double se = 0.0;
};
CovarianceEstimate sample_covariance(std::span<const double> xs, std::span<const double> ys,
                                     int groups = 20);

/// L_p norm estimate ||X||_p = (mean |X|^p)^{1/p} with a percentile bootstrap CI.
struct LpEstimate {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
LpEstimate lp_norm_bootstrap(std::span<const double> xs, int p, int resamples, std::uint64_t seed);

}  // namespace rdslab
