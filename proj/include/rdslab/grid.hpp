#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "rdslab/errors.hpp"

namespace rdslab {

struct BvNorms {
  double l1 = 0.0;
  double variation = 0.0;
  double sup = 0.0;
  double bv = 0.0;  // l1 + variation
};

/// Step function on [0,1): constant value on each cell [i/N, (i+1)/N).
///
/// All grid algebra here is exact: products, refinements and transfer-matrix
/// applications of cell-aligned integer-slope maps keep step functions inside
/// the same finite-dimensional space, so no discretization error enters.
class GridFunction {
 public:
  GridFunction() = default;

  explicit GridFunction(int resolution, double constant = 0.0)
      : values_(check_resolution(resolution), constant) {}

  explicit GridFunction(std::vector<double> values) : values_(std::move(values)) {
    check_resolution(static_cast<int>(values_.size()));
  }

  int resolution() const { return static_cast<int>(values_.size()); }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  double operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return values_[static_cast<std::size_t>(i)]; }

  /// Value at a point x in [0,1); cells are right-open.
  double eval(double x) const {
    if (x < 0.0 || x >= 1.0) throw Error(ErrorCode::OutOfRange, "point outside [0,1)");
    int i = static_cast<int>(x * resolution());
    if (i >= resolution()) i = resolution() - 1;
    return values_[static_cast<std::size_t>(i)];
  }

  double integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s / resolution();
  }

  double l1_norm() const {
    double s = 0.0;
    for (double v : values_) s += std::abs(v);
    return s / resolution();
  }

  double sup_norm() const {
    double s = 0.0;
    for (double v : values_) s = std::max(s, std::abs(v));
    return s;
  }

  /// Total variation counting interior jumps only (no boundary terms).
  double variation() const {
    double s = 0.0;
    for (int i = 1; i < resolution(); ++i)
      s += std::abs(values_[static_cast<std::size_t>(i)] - values_[static_cast<std::size_t>(i - 1)]);
    return s;
  }

  BvNorms bv_norms() const {
    BvNorms n;
    n.l1 = l1_norm();
    n.variation = variation();
    n.sup = sup_norm();
    n.bv = n.l1 + n.variation;
    return n;
  }

  double bv_norm() const { return l1_norm() + variation(); }

  /// Exact refinement: each cell split into `factor` equal copies.
  GridFunction refine(int factor) const {
    if (factor < 1) throw Error(ErrorCode::OutOfRange, "refinement factor must be >= 1");
    if (factor == 1) return *this;
    std::vector<double> out;
    out.reserve(values_.size() * static_cast<std::size_t>(factor));
    for (double v : values_)
      for (int k = 0; k < factor; ++k) out.push_back(v);
    return GridFunction(std::move(out));
  }

  GridFunction& operator+=(const GridFunction& other) { return apply(other, std::plus<>{}); }
  GridFunction& operator-=(const GridFunction& other) { return apply(other, std::minus<>{}); }
  GridFunction& operator*=(const GridFunction& other) { return apply(other, std::multiplies<>{}); }

  GridFunction& operator+=(double c) {
    for (double& v : values_) v += c;
    return *this;
  }
  GridFunction& operator-=(double c) { return *this += -c; }
  GridFunction& operator*=(double c) {
    for (double& v : values_) v *= c;
    return *this;
  }

  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator-(GridFunction a, const GridFunction& b) { return a -= b; }
  friend GridFunction operator*(GridFunction a, const GridFunction& b) { return a *= b; }
  friend GridFunction operator+(GridFunction a, double c) { return a += c; }
  friend GridFunction operator-(GridFunction a, double c) { return a += -c; }
  friend GridFunction operator*(GridFunction a, double c) { return a *= c; }
  friend GridFunction operator*(double c, GridFunction a) { return a *= c; }

  GridFunction pow(int exponent) const {
    GridFunction out(*this);
    for (double& v : out.values_) v = std::pow(v, exponent);
    return out;
  }

  /// Pointwise division; divisor must stay above `floor` on every cell.
  GridFunction divide_by(const GridFunction& divisor, double floor = 1e-10) const {
    auto [a, b] = aligned(*this, divisor);
    for (int i = 0; i < b.resolution(); ++i) {
      if (b[i] < floor)
        throw Error(ErrorCode::DegenerateDensity, "cell value below positivity floor");
      a[i] /= b[i];
    }
    return a;
  }

  /// Bring two step functions to the common refinement (lcm of resolutions).
  static std::pair<GridFunction, GridFunction> aligned(const GridFunction& a, const GridFunction& b) {
    if (a.resolution() == b.resolution()) return {a, b};
    long long l = std::lcm<long long>(a.resolution(), b.resolution());
    return {a.refine(static_cast<int>(l / a.resolution())),
            b.refine(static_cast<int>(l / b.resolution()))};
  }

 private:
  static int check_resolution(int n) {
    if (n < 1) throw Error(ErrorCode::OutOfRange, "resolution must be >= 1");
    return n;
  }

  template <class Op>
  GridFunction& apply(const GridFunction& other, Op op) {
    if (other.resolution() != resolution()) {
      auto [a, b] = aligned(*this, other);
      for (int i = 0; i < a.resolution(); ++i) a[i] = op(a[i], b[i]);
      *this = std::move(a);
      return *this;
    }
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = op(values_[i], other.values_[i]);
    return *this;
  }

  std::vector<double> values_;
};

}  // namespace rdslab
