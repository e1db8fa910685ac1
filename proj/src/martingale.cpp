#include "rdslab/martingale.hpp"

#include <cmath>
#include <numeric>

#include "rdslab/errors.hpp"

namespace rdslab {

namespace {

constexpr double kZeroFloor = 1e-14;  // exact-arithmetic noise level for sup norms

GridFunction refined_to(const GridFunction& g, int resolution) {
  if (g.resolution() == resolution) return g;
  if (resolution % g.resolution() != 0)
    throw Error(ErrorCode::ResolutionMismatch, "cannot refine to a non-multiple resolution");
  return g.refine(resolution / g.resolution());
}

}  // namespace

SymbolField K_apply(const AnnealedSystem& system, const SymbolField& f, double positivity_floor) {
  const Cocycle& cocycle = system.cocycle();
  const SymbolChain& chain = cocycle.chain();
  const SymbolField& hhat = system.conditioned_density();
  const int m = cocycle.symbol_count();
  const int W = static_cast<int>(std::lcm<long long>(f.resolution(), hhat.resolution()));

  std::vector<GridFunction> pushed;
  pushed.reserve(static_cast<std::size_t>(m));
  for (int s = 0; s < m; ++s)
    pushed.push_back(
        cocycle.apply_transfer(s, refined_to(f[s], W) * refined_to(hhat[s], W)));

  SymbolField out(m, W, 0.0);
  for (int s1 = 0; s1 < m; ++s1) {
    GridFunction acc(W, 0.0);
    for (int s = 0; s < m; ++s) {
      double q = chain.reverse(s1, s);
      if (q == 0.0) continue;
      acc += pushed[static_cast<std::size_t>(s)] * q;
    }
    out[s1] = acc.divide_by(refined_to(hhat[s1], W), positivity_floor);
  }
  return out;
}

SymbolField K_apply(const AnnealedSystem& system, const PairField& f, double positivity_floor) {
  const Cocycle& cocycle = system.cocycle();
  const SymbolChain& chain = cocycle.chain();
  const SymbolField& hhat = system.conditioned_density();
  const int m = cocycle.symbol_count();
  const int W = static_cast<int>(std::lcm<long long>(f.resolution(), hhat.resolution()));

  SymbolField out(m, W, 0.0);
  for (int s1 = 0; s1 < m; ++s1) {
    GridFunction acc(W, 0.0);
    for (int s = 0; s < m; ++s) {
      double q = chain.reverse(s1, s);
      if (q == 0.0) continue;
      acc += cocycle.apply_transfer(s, refined_to(f.at(s, s1), W) * refined_to(hhat[s], W)) * q;
    }
    out[s1] = acc.divide_by(refined_to(hhat[s1], W), positivity_floor);
  }
  return out;
}

KDecaySeries k_decay(const AnnealedSystem& system, const SymbolField& phi, int n_max,
                     const std::vector<double>& gamma, bool phi_regime, int fit_up_to) {
  KDecaySeries out;
  out.phi_regime = phi_regime;
  if (fit_up_to <= 0) fit_up_to = n_max;

  out.sup_norms.push_back(phi.sup_norm());
  SymbolField iterate = phi;
  for (int n = 1; n <= n_max; ++n) {
    iterate = K_apply(system, iterate);
    out.sup_norms.push_back(iterate.sup_norm());
  }

  auto gamma_at = [&](int n) {
    int idx = n / 2;  // gamma_{floor(n/2)}, with gamma_0 := 1
    if (idx == 0) return 1.0;
    if (idx - 1 < static_cast<int>(gamma.size())) return gamma[static_cast<std::size_t>(idx - 1)];
    return gamma.empty() ? 0.0 : gamma.back();
  };

  std::vector<double> ns, vals;
  for (int n = 1; n <= std::min(fit_up_to, n_max); ++n) {
    ns.push_back(n);
    vals.push_back(out.sup_norms[static_cast<std::size_t>(n)]);
  }
  LogLinearFit fit = fit_log_linear(ns, vals, kZeroFloor);
  if (fit.points >= 2) {
    out.envelope_delta = std::min(std::exp(fit.slope), 0.999);
    out.summable = out.envelope_delta < 1.0;
  } else {
    out.envelope_delta = 0.5;  // series already at the floor; any rate works
    out.summable = true;
  }
  for (int n = 1; n <= std::min(fit_up_to, n_max); ++n) {
    double env = std::pow(out.envelope_delta, n) + gamma_at(n);
    if (env > 0.0)
      out.envelope_C = std::max(out.envelope_C, out.sup_norms[static_cast<std::size_t>(n)] / env);
  }
  return out;
}

MartingaleDecomposition build_decomposition(const AnnealedSystem& system, const SymbolField& phi,
                                            double tol) {
  MartingaleDecomposition dec;
  const int m = phi.symbol_count();
  SymbolField chi(m, phi.resolution(), 0.0);
  SymbolField term = phi;
  std::vector<double> sups;
  const int max_terms = 400;
  bool terminated = false;

  for (int n = 1; n <= max_terms; ++n) {
    term = K_apply(system, term);
    double sup = term.sup_norm();
    if (sup <= kZeroFloor) {
      dec.truncation = n - 1;
      dec.tail_bound = sup;
      terminated = true;
      break;
    }
    chi += term;
    sups.push_back(sup);
    dec.truncation = n;
    if (sups.size() >= 3) {
      double rho = 0.0;
      for (std::size_t k = sups.size() - 2; k < sups.size(); ++k)
        rho = std::max(rho, sups[k] / sups[k - 1]);
      if (rho < 1.0) {
        double tail = sup * rho / (1.0 - rho);
        if (tail < tol) {
          dec.tail_bound = tail;
          terminated = true;
          break;
        }
      }
    }
  }
  if (!terminated)
    throw Error(ErrorCode::NotSummable, "K^n phi shows no summable geometric tail");

  dec.chi = chi;
  dec.chi_sup = chi.sup_norm();

  const int fine = chi.resolution() * system.cocycle().slope_lcm();
  PairField u = lift_to_pair(phi, fine);
  u += lift_to_pair(chi, fine);
  u -= compose_with_tau(chi, system.cocycle());
  dec.u = u;
  dec.u_sup = u.sup_norm();
  dec.u_mean = system.expectation(u);
  dec.residual = K_apply(system, u).sup_norm();

  dec.a1 = 2.0 * (dec.chi_sup + dec.tail_bound);
  dec.a2 = 2.0;
  dec.a3 = dec.u_sup > 0.0 ? 1.0 / (4.0 * dec.u_sup * dec.u_sup) : 0.0;
  return dec;
}

double second_order(const AnnealedSystem& system, const SymbolField& phi, int i, int j) {
  if (i < 0 || j < 0 || i > 20 || j > 20)
    throw Error(ErrorCode::OutOfRange, "second_order indices capped at 20");
  SymbolField kj = phi;
  for (int k = 0; k < j; ++k) kj = K_apply(system, kj);
  auto [a, b] = SymbolField::aligned(phi, kj);
  SymbolField g = a * b;
  for (int k = 0; k < i; ++k) g = K_apply(system, g);
  g += -system.expectation(g);
  return g.sup_norm();
}

double azuma_bound(const MartingaleDecomposition& decomposition, int n, double t) {
  if (t < 0.0) throw Error(ErrorCode::OutOfRange, "t must be >= 0");
  if (decomposition.u_sup == 0.0) return t > 0.0 ? 0.0 : decomposition.a2;
  return decomposition.a2 * std::exp(-decomposition.a3 * n * t * t);
}

double duality_certificate(const AnnealedSystem& system, const SymbolField& f) {
  const Cocycle& cocycle = system.cocycle();
  const int m = cocycle.symbol_count();
  const int N = system.conditioned_density().resolution();
  SymbolField kf = K_apply(system, f);
  const int fine = N * cocycle.slope_lcm();

  double worst = 0.0;
  for (int sigma = 0; sigma < m; ++sigma) {
    for (int cell = 0; cell < N; ++cell) {
      SymbolField g(m, N, 0.0);
      g[sigma][cell] = 1.0;
      auto [a, b] = SymbolField::aligned(kf, g);
      double lhs = system.expectation(a * b);
      PairField g_tau = compose_with_tau(g, cocycle);
      PairField prod = lift_to_pair(f, fine);
      prod *= g_tau;
      double rhs = system.expectation(prod);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

}  // namespace rdslab
