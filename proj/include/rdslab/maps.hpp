#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rdslab/grid.hpp"

namespace rdslab {

/// One affine branch: the source cell maps onto `slope` consecutive cells
/// starting at `target_start`; orientation -1 reverses the branch.
struct Branch {
  int slope = 1;
  int target_start = 0;
  int orientation = +1;
};

/// Piecewise-linear Markov interval map on [0,1) with base partition into M
/// equal cells. Integer slopes and cell-aligned images make the transfer
/// operator exact on step functions whose resolution is a multiple of M.
class PiecewiseMap {
 public:
  PiecewiseMap() = default;
  PiecewiseMap(int base_partition, std::vector<Branch> branches);

  int base_partition() const { return M_; }
  const std::vector<Branch>& branches() const { return branches_; }

  /// Every slope >= 2.
  bool uniformly_expanding() const { return uniformly_expanding_; }
  int max_slope() const { return max_slope_; }

  /// Concrete constant for v(g o T) <= K v(g): per branch the variation of g
  /// over the image interval plus an oscillation jump at each of the M-1
  /// interior branch boundaries, giving K = 2M - 1 (attained by the doubling
  /// map acting on an indicator of a half interval).
  double variation_constant() const { return 2.0 * M_ - 1.0; }

  /// Branch evaluation; right-open cells, x must lie in [0,1).
  double apply(double x) const;

  /// Exact matrix of the transfer operator on step functions at resolution N
  /// (N a multiple of M): column j spreads mass 1/slope over the grid cells
  /// covered by the image of grid cell j.
  Eigen::MatrixXd transfer_matrix(int resolution) const;

  /// g o T as an exact step function at resolution N * lcm(slopes).
  GridFunction pullback(const GridFunction& g) const;

 private:
  int M_ = 0;
  std::vector<Branch> branches_;
  bool uniformly_expanding_ = true;
  int max_slope_ = 1;
  int slope_lcm_ = 1;
};

/// Validate a branch table and construct the map.
/// Throws NotMarkov when a branch image is not a union of whole cells inside
/// [0,1], OutOfRange for bad sizes.
PiecewiseMap build_map(int base_partition, const std::vector<Branch>& branches);

PiecewiseMap doubling_map();
PiecewiseMap tripling_map();
/// The three-branch example map: cell0 -> [0,1) slope 3, cell1 -> [1/3,1)
/// slope 2, cell2 -> [0,1) slope 3. Lebesgue is not invariant for it.
PiecewiseMap m3_example_map();
/// Companion M=3 map with partial branches: cell0 -> [0,2/3) slope 2,
/// cell1 -> [0,1) slope 3, cell2 -> [1/3,1) slope 2. Its transfer matrix has
/// full rank on the M-grid, so cocycle decay is gradual rather than one-step.
PiecewiseMap m3_second_map();
/// Identity on [0,1/2), doubling branch on [1/2,1): a slope-1 branch makes it
/// only expanding on average when mixed with expanding symbols.
PiecewiseMap lazy_doubling_map();

}  // namespace rdslab
