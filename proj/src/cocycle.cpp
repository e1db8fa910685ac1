#include "rdslab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

namespace rdslab {

Cocycle::Cocycle(SymbolChain chain, std::vector<PiecewiseMap> maps, int resolution)
    : chain_(std::move(chain)), maps_(std::move(maps)), resolution_(resolution) {
  if (maps_.empty() || static_cast<int>(maps_.size()) != chain_.size())
    throw Error(ErrorCode::UnknownSymbol, "need exactly one map per chain symbol");
  M_ = maps_[0].base_partition();
  for (const PiecewiseMap& m : maps_) {
    if (m.base_partition() != M_)
      throw Error(ErrorCode::ResolutionMismatch, "all maps must share the base partition M");
    for (const Branch& b : m.branches())
      slope_lcm_ = static_cast<int>(std::lcm<long long>(slope_lcm_, b.slope));
  }
  if (resolution_ < M_ || resolution_ % M_ != 0)
    throw Error(ErrorCode::ResolutionMismatch, "N must be a multiple of M");
}

const PiecewiseMap& Cocycle::map(int symbol) const {
  if (symbol < 0 || symbol >= symbol_count())
    throw Error(ErrorCode::UnknownSymbol, "symbol index " + std::to_string(symbol));
  return maps_[static_cast<std::size_t>(symbol)];
}

bool Cocycle::uniformly_expanding() const {
  return std::all_of(maps_.begin(), maps_.end(),
                     [](const PiecewiseMap& m) { return m.uniformly_expanding(); });
}

const Eigen::MatrixXd& Cocycle::transfer(int symbol, int resolution) const {
  map(symbol);  // validates the index
  std::scoped_lock lock(cache_->mutex);
  auto key = std::make_pair(symbol, resolution);
  auto it = cache_->entries.find(key);
  if (it == cache_->entries.end())
    it = cache_->entries.emplace(key, maps_[static_cast<std::size_t>(symbol)].transfer_matrix(resolution)).first;
  return it->second;
}

GridFunction Cocycle::apply_transfer(int symbol, const GridFunction& g) const {
  const Eigen::MatrixXd& L = transfer(symbol, g.resolution());
  Eigen::Map<const Eigen::VectorXd> in(g.values().data(), g.resolution());
  GridFunction out(g.resolution());
  Eigen::Map<Eigen::VectorXd>(out.values().data(), out.resolution()) = L * in;
  return out;
}

GridFunction push(const Cocycle& cocycle, std::span<const int> path, const GridFunction& g) {
  GridFunction out = g;
  for (int symbol : path) out = cocycle.apply_transfer(symbol, out);
  return out;
}

GridFunction path_density(const Cocycle& cocycle, std::span<const int> past) {
  return push(cocycle, past, GridFunction(cocycle.resolution(), 1.0));
}

GridFunction normalized_push(const Cocycle& cocycle, std::span<const int> past,
                             std::span<const int> path, const GridFunction& g,
                             double positivity_floor) {
  GridFunction h = path_density(cocycle, past);
  for (int i = 0; i < h.resolution(); ++i)
    if (h[i] < positivity_floor)
      throw Error(ErrorCode::DegenerateDensity, "past density below positivity floor");
  GridFunction numerator = push(cocycle, path, g * h);
  GridFunction h_end = push(cocycle, path, h);
  return numerator.divide_by(h_end, positivity_floor);
}

LogLinearFit fit_log_linear(std::span<const double> n, std::span<const double> values, double floor) {
  LogLinearFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] > floor) pts.emplace_back(n[i], std::log(values[i]));
  }
  fit.points = static_cast<int>(pts.size());
  if (fit.points < 2) return fit;
  for (auto [x, y] : pts) {
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  double count = static_cast<double>(fit.points);
  double denom = count * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) return fit;
  fit.slope = (count * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / count;
  double ss_res = 0.0, ss_tot = 0.0, mean_y = sy / count;
  for (auto [x, y] : pts) {
    double r = y - (fit.intercept + fit.slope * x);
    ss_res += r * r;
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  fit.r_squared = (ss_tot > 0.0) ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

namespace {

constexpr double kExactNoiseFloor = 1e-13;

DecaySeries summarize_decay(std::vector<std::vector<double>>& per_path, int n_max) {
  DecaySeries series;
  for (int n = 1; n <= n_max; ++n) {
    std::vector<double> column;
    column.reserve(per_path.size());
    for (const auto& row : per_path) column.push_back(row[static_cast<std::size_t>(n - 1)]);
    std::sort(column.begin(), column.end());
    auto quantile = [&](double q) {
      double pos = q * (static_cast<double>(column.size()) - 1);
      std::size_t lo = static_cast<std::size_t>(pos);
      std::size_t hi = std::min(lo + 1, column.size() - 1);
      double w = pos - static_cast<double>(lo);
      return (1 - w) * column[lo] + w * column[hi];
    };
    series.n.push_back(n);
    series.median.push_back(quantile(0.5));
    series.q10.push_back(quantile(0.1));
    series.q90.push_back(quantile(0.9));
  }
  LogLinearFit fit = fit_log_linear(series.n, series.median, kExactNoiseFloor);
  series.identically_zero = fit.points == 0;
  if (!series.identically_zero) {
    series.K_est = std::exp(fit.intercept);
    series.lambda_est = -fit.slope;
    series.r_squared = fit.r_squared;
    for (std::size_t i = 0; i < series.median.size(); ++i)
      if (series.median[i] > kExactNoiseFloor)
        series.envelope_K =
            std::max(series.envelope_K, series.median[i] * std::exp(series.lambda_est * series.n[i]));
  }
  return series;
}

}  // namespace

DecaySeries decay_exp1(const Cocycle& cocycle, int n_max, int n_paths, std::uint64_t seed) {
  if (n_max < 5) throw Error(ErrorCode::OutOfRange, "n_max must be >= 5");
  const int burn_in = n_max + 20;
  std::vector<std::vector<double>> per_path;
  per_path.reserve(static_cast<std::size_t>(n_paths));
  for (int p = 0; p < n_paths; ++p) {
    std::vector<int> w = sample_path(cocycle.chain(), burn_in + n_max, derive_seed(seed, p));
    std::span<const int> past(w.data(), static_cast<std::size_t>(burn_in));
    GridFunction iterate(cocycle.resolution(), 1.0);  // L_w^n 1 along the future part
    GridFunction reference = path_density(cocycle, past);
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
      int symbol = w[static_cast<std::size_t>(burn_in + n - 1)];
      iterate = cocycle.apply_transfer(symbol, iterate);
      reference = cocycle.apply_transfer(symbol, reference);
      row.push_back((iterate - reference).bv_norm());
    }
    per_path.push_back(std::move(row));
  }
  return summarize_decay(per_path, n_max);
}

DecaySeries decay_exp2(const Cocycle& cocycle, const GridFunction& g, int n_max, int n_paths,
                       std::uint64_t seed) {
  if (n_max < 5) throw Error(ErrorCode::OutOfRange, "n_max must be >= 5");
  const int burn_in = n_max + 20;
  std::vector<std::vector<double>> per_path;
  per_path.reserve(static_cast<std::size_t>(n_paths));
  for (int p = 0; p < n_paths; ++p) {
    std::vector<int> w = sample_path(cocycle.chain(), burn_in + n_max, derive_seed(seed, p));
    std::span<const int> past(w.data(), static_cast<std::size_t>(burn_in));
    GridFunction h = path_density(cocycle, past);
    GridFunction g0 = g;
    if (g0.resolution() != h.resolution()) {
      auto [a, b] = GridFunction::aligned(g0, h);
      g0 = std::move(a);
      h = std::move(b);
    }
    g0 -= (g0 * h).integral();  // fiberwise centering: mu_w(g) = m(g h_w) = 0
    GridFunction numerator = g0 * h;
    GridFunction h_end = h;
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(n_max));
    for (int n = 1; n <= n_max; ++n) {
      int symbol = w[static_cast<std::size_t>(burn_in + n - 1)];
      numerator = cocycle.apply_transfer(symbol, numerator);
      h_end = cocycle.apply_transfer(symbol, h_end);
      row.push_back(numerator.divide_by(h_end).bv_norm());
    }
    per_path.push_back(std::move(row));
  }
  return summarize_decay(per_path, n_max);
}

TemperednessReport temperedness_check(std::span<const double> K_series, double lambda_est) {
  if (K_series.size() < 50)
    throw Error(ErrorCode::OutOfRange, "need a K series of length >= 50");
  TemperednessReport report;
  report.epsilon = lambda_est / 3.0;
  const std::size_t start = K_series.size() / 2;
  for (std::size_t t = start; t < K_series.size(); ++t) {
    double k = std::max(K_series[t], 1e-300);
    report.tail_statistic =
        std::max(report.tail_statistic, std::abs(std::log(k)) / static_cast<double>(t));
  }
  report.tempered = report.tail_statistic <= report.epsilon;
  return report;
}

std::vector<double> estimate_K_along_shifts(const Cocycle& cocycle, int shifts, int n_max,
                                            double lambda_est, std::uint64_t seed) {
  const int burn_in = n_max + 20;
  std::vector<int> w = sample_path(cocycle.chain(), burn_in + shifts + n_max, seed);
  std::vector<double> K(static_cast<std::size_t>(shifts), 0.0);
  for (int t = 0; t < shifts; ++t) {
    std::span<const int> past(w.data(), static_cast<std::size_t>(burn_in + t));
    GridFunction iterate(cocycle.resolution(), 1.0);
    GridFunction reference = path_density(cocycle, past);
    double best = 1.0;  // K >= 1 in the paper's normalization
    for (int n = 1; n <= n_max; ++n) {
      int symbol = w[static_cast<std::size_t>(burn_in + t + n - 1)];
      iterate = cocycle.apply_transfer(symbol, iterate);
      reference = cocycle.apply_transfer(symbol, reference);
      double dist = (iterate - reference).bv_norm();
      if (dist > kExactNoiseFloor) best = std::max(best, dist * std::exp(lambda_est * n));
    }
    K[static_cast<std::size_t>(t)] = best;
  }
  return K;
}

}  // namespace rdslab
