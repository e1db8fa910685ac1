#pragma once

#include <vector>

#include "rdslab/cocycle.hpp"
#include "rdslab/grid.hpp"

namespace rdslab {

/// Symbol-indexed family of step functions: a function of (w_0, x).
class SymbolField {
 public:
  SymbolField() = default;
  SymbolField(int symbols, int resolution, double constant = 0.0)
      : members_(static_cast<std::size_t>(symbols), GridFunction(resolution, constant)) {}
  explicit SymbolField(std::vector<GridFunction> members);

  int symbol_count() const { return static_cast<int>(members_.size()); }
  int resolution() const { return members_.empty() ? 0 : members_[0].resolution(); }
  const GridFunction& operator[](int s) const { return members_[static_cast<std::size_t>(s)]; }
  GridFunction& operator[](int s) { return members_[static_cast<std::size_t>(s)]; }

  SymbolField refine(int factor) const;
  /// Align all members (and two fields) to a common resolution.
  static std::pair<SymbolField, SymbolField> aligned(const SymbolField& a, const SymbolField& b);

  double sup_norm() const;
  double max_bv_norm() const;

  SymbolField& operator+=(const SymbolField& other);
  SymbolField& operator-=(const SymbolField& other);
  SymbolField& operator*=(const SymbolField& other);
  SymbolField& operator+=(double c);
  SymbolField& operator*=(double c);
  friend SymbolField operator+(SymbolField a, const SymbolField& b) { return a += b; }
  friend SymbolField operator-(SymbolField a, const SymbolField& b) { return a -= b; }
  friend SymbolField operator*(SymbolField a, const SymbolField& b) { return a *= b; }
  friend SymbolField operator+(SymbolField a, double c) { return a += c; }
  friend SymbolField operator-(SymbolField a, double c) { return a += -c; }
  friend SymbolField operator*(SymbolField a, double c) { return a *= c; }

  SymbolField pow(int exponent) const;

 private:
  std::vector<GridFunction> members_;
};

/// Family indexed by a symbol pair (w_0, w_1): a function of (w_0, w_1, x).
class PairField {
 public:
  PairField() = default;
  PairField(int symbols, int resolution, double constant = 0.0)
      : symbols_(symbols),
        members_(static_cast<std::size_t>(symbols * symbols), GridFunction(resolution, constant)) {}

  int symbol_count() const { return symbols_; }
  int resolution() const { return members_.empty() ? 0 : members_[0].resolution(); }
  const GridFunction& at(int s, int s1) const {
    return members_[static_cast<std::size_t>(s * symbols_ + s1)];
  }
  GridFunction& at(int s, int s1) { return members_[static_cast<std::size_t>(s * symbols_ + s1)]; }

  double sup_norm() const;

  PairField& operator+=(const PairField& other);
  PairField& operator-=(const PairField& other);
  PairField& operator*=(const PairField& other);
  friend PairField operator+(PairField a, const PairField& b) { return a += b; }
  friend PairField operator-(PairField a, const PairField& b) { return a -= b; }
  friend PairField operator*(PairField a, const PairField& b) { return a *= b; }

  PairField pow(int exponent) const;

 private:
  int symbols_ = 0;
  std::vector<GridFunction> members_;
};

/// Lift a function of (w_0, x) to a function of (w_0, w_1, x); values unchanged.
PairField lift_to_pair(const SymbolField& f, int resolution);

/// chi o tau as a pair field: (s, s', x) -> chi(s', T_s x), built from exact
/// pullbacks on the one-step refined grid.
PairField compose_with_tau(const SymbolField& chi, const Cocycle& cocycle);

/// Per-symbol observable with recorded norms and the K-scaled norm
/// max_s K_map(s) * ||phi_s||_BV used by the scaling condition.
struct ObservableFamily {
  SymbolField values;
  double sup = 0.0;
  double max_bv = 0.0;
  double scaled_norm = 0.0;

  static ObservableFamily from(const SymbolField& field, const Cocycle& cocycle);
};

}  // namespace rdslab
