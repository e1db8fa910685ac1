#include "rdslab/fields.hpp"

#include <numeric>

#include "rdslab/errors.hpp"

namespace rdslab {

SymbolField::SymbolField(std::vector<GridFunction> members) : members_(std::move(members)) {
  for (const GridFunction& g : members_)
    if (g.resolution() != resolution())
      throw Error(ErrorCode::ResolutionMismatch, "symbol field members disagree on resolution");
}

SymbolField SymbolField::refine(int factor) const {
  std::vector<GridFunction> out;
  out.reserve(members_.size());
  for (const GridFunction& g : members_) out.push_back(g.refine(factor));
  return SymbolField(std::move(out));
}

std::pair<SymbolField, SymbolField> SymbolField::aligned(const SymbolField& a, const SymbolField& b) {
  long long l = std::lcm<long long>(a.resolution(), b.resolution());
  return {a.refine(static_cast<int>(l / a.resolution())),
          b.refine(static_cast<int>(l / b.resolution()))};
}

double SymbolField::sup_norm() const {
  double s = 0.0;
  for (const GridFunction& g : members_) s = std::max(s, g.sup_norm());
  return s;
}

double SymbolField::max_bv_norm() const {
  double s = 0.0;
  for (const GridFunction& g : members_) s = std::max(s, g.bv_norm());
  return s;
}

SymbolField& SymbolField::operator+=(const SymbolField& other) {
  for (int s = 0; s < symbol_count(); ++s) members_[static_cast<std::size_t>(s)] += other[s];
  return *this;
}
SymbolField& SymbolField::operator-=(const SymbolField& other) {
  for (int s = 0; s < symbol_count(); ++s) members_[static_cast<std::size_t>(s)] -= other[s];
  return *this;
}
SymbolField& SymbolField::operator*=(const SymbolField& other) {
  for (int s = 0; s < symbol_count(); ++s) members_[static_cast<std::size_t>(s)] *= other[s];
  return *this;
}
SymbolField& SymbolField::operator+=(double c) {
  for (GridFunction& g : members_) g += c;
  return *this;
}
SymbolField& SymbolField::operator*=(double c) {
  for (GridFunction& g : members_) g *= c;
  return *this;
}

SymbolField SymbolField::pow(int exponent) const {
  std::vector<GridFunction> out;
  out.reserve(members_.size());
  for (const GridFunction& g : members_) out.push_back(g.pow(exponent));
  return SymbolField(std::move(out));
}

double PairField::sup_norm() const {
  double s = 0.0;
  for (const GridFunction& g : members_) s = std::max(s, g.sup_norm());
  return s;
}

PairField& PairField::operator+=(const PairField& other) {
  for (std::size_t i = 0; i < members_.size(); ++i) members_[i] += other.members_[i];
  return *this;
}
PairField& PairField::operator-=(const PairField& other) {
  for (std::size_t i = 0; i < members_.size(); ++i) members_[i] -= other.members_[i];
  return *this;
}
PairField& PairField::operator*=(const PairField& other) {
  for (std::size_t i = 0; i < members_.size(); ++i) members_[i] *= other.members_[i];
  return *this;
}

PairField PairField::pow(int exponent) const {
  PairField out = *this;
  for (GridFunction& g : out.members_) g = g.pow(exponent);
  return out;
}

PairField lift_to_pair(const SymbolField& f, int resolution) {
  PairField out(f.symbol_count(), resolution);
  for (int s = 0; s < f.symbol_count(); ++s) {
    GridFunction member = f[s];
    if (member.resolution() != resolution) {
      if (resolution % member.resolution() != 0)
        throw Error(ErrorCode::ResolutionMismatch, "pair resolution must refine the field");
      member = member.refine(resolution / member.resolution());
    }
    for (int s1 = 0; s1 < f.symbol_count(); ++s1) out.at(s, s1) = member;
  }
  return out;
}

PairField compose_with_tau(const SymbolField& chi, const Cocycle& cocycle) {
  const int fine = chi.resolution() * cocycle.slope_lcm();
  PairField out(chi.symbol_count(), fine);
  for (int s = 0; s < chi.symbol_count(); ++s) {
    for (int s1 = 0; s1 < chi.symbol_count(); ++s1) {
      GridFunction pulled = cocycle.map(s).pullback(chi[s1]);
      if (pulled.resolution() != fine) {
        if (fine % pulled.resolution() != 0)
          throw Error(ErrorCode::ResolutionMismatch, "pullback resolution mismatch");
        pulled = pulled.refine(fine / pulled.resolution());
      }
      out.at(s, s1) = pulled;
    }
  }
  return out;
}

ObservableFamily ObservableFamily::from(const SymbolField& field, const Cocycle& cocycle) {
  ObservableFamily fam;
  fam.values = field;
  fam.sup = field.sup_norm();
  fam.max_bv = field.max_bv_norm();
  for (int s = 0; s < field.symbol_count(); ++s)
    fam.scaled_norm =
        std::max(fam.scaled_norm, cocycle.map(s).variation_constant() * field[s].bv_norm());
  return fam;
}

}  // namespace rdslab
