#include "rdslab/maps.hpp"

#include <cmath>
#include <numeric>

#include "rdslab/errors.hpp"

namespace rdslab {

PiecewiseMap::PiecewiseMap(int base_partition, std::vector<Branch> branches)
    : M_(base_partition), branches_(std::move(branches)) {
  for (const Branch& b : branches_) {
    max_slope_ = std::max(max_slope_, b.slope);
    slope_lcm_ = static_cast<int>(std::lcm<long long>(slope_lcm_, b.slope));
    if (b.slope < 2) uniformly_expanding_ = false;
  }
}

PiecewiseMap build_map(int base_partition, const std::vector<Branch>& branches) {
  if (base_partition < 2)
    throw Error(ErrorCode::OutOfRange, "base partition must have M >= 2 cells");
  if (static_cast<int>(branches.size()) != base_partition)
    throw Error(ErrorCode::NotMarkov, "need exactly one branch per cell");
  for (std::size_t c = 0; c < branches.size(); ++c) {
    const Branch& b = branches[c];
    if (b.slope < 1)
      throw Error(ErrorCode::NotMarkov, "branch slope must be a positive integer");
    if (b.orientation != 1 && b.orientation != -1)
      throw Error(ErrorCode::NotMarkov, "branch orientation must be +1 or -1");
    if (b.target_start < 0 || b.target_start + b.slope > base_partition)
      throw Error(ErrorCode::NotMarkov,
                  "branch image of cell " + std::to_string(c) + " leaves [0,1]");
  }
  return PiecewiseMap(base_partition, branches);
}

double PiecewiseMap::apply(double x) const {
  if (x < 0.0 || x >= 1.0) throw Error(ErrorCode::OutOfRange, "apply_map needs x in [0,1)");
  int cell = std::min(static_cast<int>(x * M_), M_ - 1);
  const Branch& b = branches_[static_cast<std::size_t>(cell)];
  double lo = static_cast<double>(b.target_start) / M_;
  double hi = static_cast<double>(b.target_start + b.slope) / M_;
  double offset = x - static_cast<double>(cell) / M_;
  if (b.orientation > 0) {
    double y = lo + b.slope * offset;
    if (y >= hi) y = std::nextafter(hi, lo);  // fp guard, y < hi holds exactly
    return y;
  }
  // A decreasing branch maps the left cell edge to the right image edge;
  // identify that single point with the left edge to stay inside [0,1).
  double y = hi - b.slope * offset;
  if (y >= hi) y = lo;
  return y;
}

Eigen::MatrixXd PiecewiseMap::transfer_matrix(int resolution) const {
  if (resolution % M_ != 0)
    throw Error(ErrorCode::ResolutionMismatch, "resolution must be a multiple of M");
  const int per_cell = resolution / M_;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(resolution, resolution);
  for (int c = 0; c < M_; ++c) {
    const Branch& b = branches_[static_cast<std::size_t>(c)];
    const double weight = 1.0 / b.slope;
    for (int u = 0; u < per_cell; ++u) {
      int j = c * per_cell + u;  // source grid cell
      // image of grid cell j is `slope` consecutive grid cells
      int first = (b.orientation > 0)
                      ? b.target_start * per_cell + b.slope * u
                      : (b.target_start + b.slope) * per_cell - b.slope * (u + 1);
      for (int k = 0; k < b.slope; ++k) L(first + k, j) += weight;
    }
  }
  return L;
}

GridFunction PiecewiseMap::pullback(const GridFunction& g) const {
  if (g.resolution() % M_ != 0)
    throw Error(ErrorCode::ResolutionMismatch, "resolution must be a multiple of M");
  const int fine = g.resolution() * slope_lcm_;
  GridFunction out(fine);
  for (int q = 0; q < fine; ++q) {
    double x = (q + 0.5) / fine;  // midpoints avoid cell boundaries, so exact
    out[q] = g.eval(apply(x));
  }
  return out;
}

PiecewiseMap doubling_map() {
  return build_map(2, {{2, 0, 1}, {2, 0, 1}});
}

PiecewiseMap tripling_map() {
  return build_map(3, {{3, 0, 1}, {3, 0, 1}, {3, 0, 1}});
}

PiecewiseMap m3_example_map() {
  return build_map(3, {{3, 0, 1}, {2, 1, 1}, {3, 0, 1}});
}

PiecewiseMap m3_second_map() {
  return build_map(3, {{2, 0, 1}, {3, 0, 1}, {2, 1, 1}});
}

PiecewiseMap lazy_doubling_map() {
  return build_map(2, {{1, 0, 1}, {2, 0, 1}});
}

}  // namespace rdslab
