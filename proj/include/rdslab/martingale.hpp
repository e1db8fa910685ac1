#pragma once

#include <vector>

#include "rdslab/annealed.hpp"
#include "rdslab/fields.hpp"

namespace rdslab {

/// Transfer operator K of the skew product restricted to the sigma-algebra
/// generated by (w_j)_{j>=0} and x, realized on symbol-indexed fields by the
/// reverse-chain formula
///   (K f)(s', y) = [ sum_s Q(s'->s) L_s( f(s[,s'], .) hhat(s, .) )(y) ] / hhat(s', y),
/// where Q are the reversed transitions. The formula closes on functions of
/// (w_0, x); it is validated against the duality E[(K f) g] = E[f (g o tau)]
/// rather than trusted.
SymbolField K_apply(const AnnealedSystem& system, const SymbolField& f,
                    double positivity_floor = 1e-10);
SymbolField K_apply(const AnnealedSystem& system, const PairField& f,
                    double positivity_floor = 1e-10);

struct KDecaySeries {
  std::vector<double> sup_norms;  // index n = 0..n_max, entry ||K^n phi||_inf
  double envelope_C = 0.0;        // fitted constant of C (delta^n + gamma_{n/2})
  double envelope_delta = 0.0;
  bool phi_regime = true;         // true: gamma = phi_{n,R} (essinf h > 0); false: psi
  bool summable = true;
};

/// Exact sup norms of K^n phi for n = 0..n_max together with a fitted
/// envelope C (delta^n + gamma_{floor(n/2)}); gamma are the chain's mixing
/// coefficients for the applicable regime (gamma_0 := 1).
KDecaySeries k_decay(const AnnealedSystem& system, const SymbolField& phi, int n_max,
                     const std::vector<double>& gamma, bool phi_regime, int fit_up_to = 0);

struct MartingaleDecomposition {
  SymbolField chi;  // sum_{n=1..truncation} K^n phi
  PairField u;      // phi + chi - chi o tau on the one-step refined grid
  int truncation = 0;
  double tail_bound = 0.0;  // geometric bound on the dropped sum_{n>truncation} ||K^n phi||
  double residual = 0.0;    // ||K u||_inf, computed
  double u_sup = 0.0;
  double chi_sup = 0.0;
  double u_mean = 0.0;  // E_mu[u], should vanish
  double a1 = 0.0;      // |S_n phi - S_n u| <= a1 = 2(||chi|| + tail)
  double a2 = 2.0;
  double a3 = 0.0;  // exponent constant 1 / (4 ||u||^2)
};

/// chi = sum K^n phi truncated once the geometric tail drops below tol;
/// u = phi + chi - chi o tau, so that K u = -K^{truncation+1} phi up to the
/// hhat fixed-point residual. Throws NotSummable when no geometric tail
/// emerges within 400 iterates.
MartingaleDecomposition build_decomposition(const AnnealedSystem& system, const SymbolField& phi,
                                            double tol);

/// || K^i (phi K^j phi) - mu(K^i (phi K^j phi)) ||_inf, exact.
double second_order(const AnnealedSystem& system, const SymbolField& phi, int i, int j);

/// Concentration bound from Azuma-Hoeffding with increments bounded by
/// ||u||_inf: P(|S_n| >= t n + a1) <= 2 exp(-n t^2 / (4 ||u||^2)).
/// Derivation: E[e^{l u}] <= e^{l^2 ||u||^2} per increment and Chernoff with
/// l = t / (2 ||u||^2); the a1 offset absorbs the coboundary part.
double azuma_bound(const MartingaleDecomposition& decomposition, int n, double t);

/// max over the symbol-times-cell indicator basis g (at the given resolution)
/// of |E[(K f) g] - E[f (g o tau)]|; the certificate behind K_apply.
double duality_certificate(const AnnealedSystem& system, const SymbolField& f);

}  // namespace rdslab
