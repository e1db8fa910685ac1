#include "rdslab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double ks_distance_vs_normal(std::span<const double> sample) {
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double f = normal_cdf(sorted[i]);
    double di = static_cast<double>(i);
    worst = std::max(worst, std::max((di + 1) / n - f, f - di / n));
  }
  return worst;
}

double dkw_radius(std::size_t n, double alpha) {
  return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(n)));
}

namespace {

// Continued fraction for the regularized incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(b) - std::lgamma(a) +
                        b * std::log(1.0 - x) + a * std::log(x)) *
                   betacf(b, a, 1.0 - x) / b;
}

double clopper_pearson_upper(std::int64_t k, std::int64_t n, double delta) {
  if (k >= n) return 1.0;
  // smallest p with P(Bin(n,p) <= k) <= delta; P(X <= k) = I_{1-p}(n-k, k+1)
  double lo = static_cast<double>(k) / static_cast<double>(n), hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double tail = incomplete_beta(static_cast<double>(n - k), static_cast<double>(k + 1), 1.0 - mid);
    if (tail > delta) lo = mid;
    else hi = mid;
  }
  return hi;
}

double clopper_pearson_lower(std::int64_t k, std::int64_t n, double delta) {
  if (k <= 0) return 0.0;
  // largest p with P(Bin(n,p) >= k) <= delta; P(X >= k) = I_p(k, n-k+1)
  double lo = 0.0, hi = static_cast<double>(k) / static_cast<double>(n);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    double tail = incomplete_beta(static_cast<double>(k), static_cast<double>(n - k + 1), mid);
    if (tail > delta) hi = mid;
    else lo = mid;
  }
  return lo;
}

double mean(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  double mu = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return s / static_cast<double>(xs.size() - 1);
}

double batch_se(std::span<const double> xs, int groups) {
  if (static_cast<int>(xs.size()) < 2 * groups) groups = std::max(2, static_cast<int>(xs.size() / 2));
  const std::size_t per = xs.size() / static_cast<std::size_t>(groups);
  std::vector<double> ms;
  ms.reserve(static_cast<std::size_t>(groups));
  for (int g = 0; g < groups; ++g) {
    std::size_t lo = static_cast<std::size_t>(g) * per;
    std::size_t hi = (g == groups - 1) ? xs.size() : lo + per;
    ms.push_back(mean(xs.subspan(lo, hi - lo)));
  }
  return std::sqrt(variance(ms) / static_cast<double>(groups));
}

MomentEstimate sample_moment(std::span<const double> xs, int p) {
  std::vector<double> powered;
  powered.reserve(xs.size());
  for (double x : xs) powered.push_back(std::pow(x, p));
  MomentEstimate est;
  est.value = mean(powered);
  est.se = std::sqrt(variance(powered) / static_cast<double>(powered.size()));
  return est;
}

CovarianceEstimate sample_covariance(std::span<const double> xs, std::span<const double> ys,
                                     int groups) {
  if (xs.size() != ys.size())
    throw Error(ErrorCode::OutOfRange, "covariance inputs must have equal length");
  const double mx = mean(xs), my = mean(ys);
  std::vector<double> prod;
  prod.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) prod.push_back((xs[i] - mx) * (ys[i] - my));
  CovarianceEstimate est;
  est.value = mean(prod);
  est.se = batch_se(prod, groups);
  return est;
}

LpEstimate lp_norm_bootstrap(std::span<const double> xs, int p, int resamples, std::uint64_t seed) {
  std::vector<double> powered;
  powered.reserve(xs.size());
  for (double x : xs) powered.push_back(std::pow(std::abs(x), p));
  LpEstimate est;
  est.value = std::pow(mean(powered), 1.0 / p);

  std::mt19937_64 rng(seed);
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(resamples));
  const std::size_t n = powered.size();
  for (int r = 0; r < resamples; ++r) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
      if (j >= n) j = n - 1;
      s += powered[j];
    }
    stats.push_back(std::pow(s / static_cast<double>(n), 1.0 / p));
  }
  std::sort(stats.begin(), stats.end());
  est.lo = stats[static_cast<std::size_t>(0.025 * (resamples - 1))];
  est.hi = stats[static_cast<std::size_t>(0.975 * (resamples - 1))];
  return est;
}

}  // namespace rdslab
