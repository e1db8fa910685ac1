#include <doctest.h>

#include <cmath>
#include <random>

#include "rdslab/martingale.hpp"
#include "rdslab/rng.hpp"

using namespace rdslab;

namespace {

Eigen::MatrixXd running_P() {
  Eigen::MatrixXd P(2, 2);
  P << 0.9, 0.1, 0.2, 0.8;
  return P;
}

Eigen::MatrixXd iid_P() {
  Eigen::MatrixXd P(2, 2);
  P << 0.5, 0.5, 0.5, 0.5;
  return P;
}

Cocycle two_symbol_m3(int resolution = 3) {
  return Cocycle(build_chain(running_P()), {m3_example_map(), m3_second_map()}, resolution);
}

Cocycle all_doubling(int resolution = 4) {
  return Cocycle(build_chain(iid_P()), {doubling_map(), doubling_map()}, resolution);
}

SymbolField half_indicator(int symbols, int resolution) {
  GridFunction g(resolution);
  for (int i = 0; i < resolution; ++i) g[i] = (2 * i < resolution) ? 0.5 : -0.5;
  return SymbolField(std::vector<GridFunction>(static_cast<std::size_t>(symbols), g));
}

SymbolField random_centered(const AnnealedSystem& system, int resolution, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int m = system.cocycle().symbol_count();
  SymbolField f(m, resolution, 0.0);
  for (int s = 0; s < m; ++s)
    for (int i = 0; i < resolution; ++i) f[s][i] = 2.0 * uniform01(rng) - 1.0;
  return system.centered(f);
}

std::vector<double> phi_gamma(const AnnealedSystem& system, int n_max) {
  return mixing_profile(system.cocycle().chain(), n_max).phi_reverse;
}

}  // namespace

TEST_CASE("K preserves constants") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField c(2, 3, 1.7);
  SymbolField out = K_apply(system, c);
  for (int s = 0; s < 2; ++s) CHECK((out[s] - GridFunction(out.resolution(), 1.7)).sup_norm() < 1e-11);
}

TEST_CASE("K phi = 0 for the doubling/iid half-indicator case") {
  AnnealedSystem system(all_doubling());
  SymbolField phi = half_indicator(2, 4);
  SymbolField out = K_apply(system, phi);
  CHECK(out.sup_norm() < 1e-13);
}

TEST_CASE("K is an L-infinity contraction") {
  AnnealedSystem system(two_symbol_m3());
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    SymbolField f(2, 3, 0.0);
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i < 3; ++i) f[s][i] = 2.0 * uniform01(rng) - 1.0;
    CHECK(K_apply(system, f).sup_norm() <= f.sup_norm() + 1e-12);
  }
}

TEST_CASE("K preserves the annealed mean") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField f = random_centered(system, 3, 5);
  f += 0.37;
  SymbolField kf = K_apply(system, f);
  CHECK(system.expectation(kf) == doctest::Approx(system.expectation(f)).epsilon(1e-11));
}

TEST_CASE("duality certificate against the indicator basis") {
  AnnealedSystem system(two_symbol_m3());
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    SymbolField f(2, 3, 0.0);
    for (int s = 0; s < 2; ++s)
      for (int i = 0; i < 3; ++i) f[s][i] = 2.0 * uniform01(rng) - 1.0;
    CHECK(duality_certificate(system, f) < 1e-11);
  }
}

TEST_CASE("K of a pair field: duality on a composed test function") {
  // E[(K(g o tau)) f] must equal E[(g o tau)(f o tau)] = E[g f]; with
  // K(g o tau) = g this is the exactness of the pair-field formula.
  AnnealedSystem system(two_symbol_m3());
  SymbolField g = random_centered(system, 3, 11);
  PairField g_tau = compose_with_tau(g, system.cocycle());
  SymbolField recovered = K_apply(system, g_tau);
  auto [a, b] = SymbolField::aligned(recovered, g);
  SymbolField diff = a - b;
  CHECK(diff.sup_norm() < 1e-10);
}

TEST_CASE("k_decay series: zero case and contraction monotonicity") {
  AnnealedSystem doubling(all_doubling());
  SymbolField phi = half_indicator(2, 4);
  KDecaySeries zero = k_decay(doubling, phi, 8, {}, true);
  for (std::size_t n = 1; n < zero.sup_norms.size(); ++n) CHECK(zero.sup_norms[n] < 1e-13);

  AnnealedSystem generic(two_symbol_m3());
  SymbolField psi = random_centered(generic, 3, 13);
  KDecaySeries series = k_decay(generic, psi, 20, phi_gamma(generic, 20), true);
  for (std::size_t n = 1; n < series.sup_norms.size(); ++n)
    CHECK(series.sup_norms[n] <= series.sup_norms[n - 1] + 1e-12);
  // decay rate is limited by the chain's 0.7 eigenvalue through gamma_{n/2}
  CHECK(series.sup_norms.back() < 1e-2 * series.sup_norms[1]);
  CHECK(series.envelope_delta < 1.0);
}

TEST_CASE("k_decay envelope fitted on a prefix dominates the tail") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_centered(system, 3, 17);
  KDecaySeries series = k_decay(system, phi, 25, phi_gamma(system, 25), true, /*fit_up_to=*/12);
  auto gamma_at = [&](int n) {
    int idx = n / 2;
    std::vector<double> gam = phi_gamma(system, 25);
    if (idx == 0) return 1.0;
    return gam[static_cast<std::size_t>(std::min<int>(idx - 1, static_cast<int>(gam.size()) - 1))];
  };
  for (int n = 1; n <= 25; ++n) {
    double env = series.envelope_C * (std::pow(series.envelope_delta, n) + gamma_at(n));
    CHECK(series.sup_norms[static_cast<std::size_t>(n)] <= env * (1.0 + 1e-9) + 1e-13);
  }
}

TEST_CASE("decomposition of the exact K phi = 0 case") {
  AnnealedSystem system(all_doubling());
  SymbolField phi = half_indicator(2, 4);
  MartingaleDecomposition dec = build_decomposition(system, phi, 1e-10);
  CHECK(dec.truncation == 0);
  CHECK(dec.chi_sup < 1e-13);
  CHECK(dec.residual < 1e-12);
  CHECK(dec.u_sup == doctest::Approx(0.5).epsilon(1e-12));  // u = phi
  CHECK(std::abs(dec.u_mean) < 1e-12);
}

TEST_CASE("decomposition residual bounded by the truncation tail") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_centered(system, 3, 19);
  MartingaleDecomposition dec = build_decomposition(system, phi, 1e-10);
  CHECK(dec.residual <= 10.0 * 1e-10);
  CHECK(dec.residual <= dec.tail_bound + 1e-11);
  CHECK(std::abs(dec.u_mean) < 1e-10);
}

TEST_CASE("E[u^2] equals the series variance within combined tolerances") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_centered(system, 3, 23);
  MartingaleDecomposition dec = build_decomposition(system, phi, 1e-11);
  VarianceResult var = system.asymptotic_variance(phi, 80);
  PairField u2 = dec.u;
  u2 *= dec.u;
  double eu2 = system.expectation(u2);
  // |E[u^2] - s^2| <= 2 ||u|| * (2 * tail) + tail^2 + variance truncation
  double tol = 4.0 * dec.u_sup * dec.tail_bound + dec.tail_bound * dec.tail_bound +
               var.tail_bound + 1e-9;
  CHECK(std::abs(eu2 - var.s2) <= tol);
}

TEST_CASE("second order values: identity case and contraction product bound") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_centered(system, 3, 29);

  // i = j = 0: sup |phi^2 - mu(phi^2)|
  SymbolField sq = phi * phi;
  SymbolField centered_sq = system.centered(sq);
  CHECK(second_order(system, phi, 0, 0) == doctest::Approx(centered_sq.sup_norm()).epsilon(1e-11));

  SymbolField kj = phi;
  for (int j = 0; j <= 6; ++j) {
    if (j > 0) kj = K_apply(system, kj);
    double bound = 2.0 * phi.sup_norm() * kj.sup_norm();
    for (int i = 0; i <= j; ++i)
      CHECK(second_order(system, phi, i, j) <= bound + 1e-11);
  }
}

TEST_CASE("second order table is dominated by the fitted gamma envelope") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_centered(system, 3, 31);
  KDecaySeries kd = k_decay(system, phi, 12, phi_gamma(system, 12), true);
  auto gamma_at = [&](int n) {
    std::vector<double> gam = phi_gamma(system, 12);
    int idx = n / 2;
    if (idx == 0) return 1.0;
    return gam[static_cast<std::size_t>(std::min<int>(idx - 1, static_cast<int>(gam.size()) - 1))];
  };
  // fit C on the small sub-table, then verify on the full one
  double C = 0.0;
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; j <= 4; ++j) {
      int n = std::max(i, j);
      double env = std::pow(kd.envelope_delta, n) + gamma_at(n);
      C = std::max(C, second_order(system, phi, i, j) / env);
    }
  for (int i = 0; i <= 8; ++i)
    for (int j = 0; j <= 8; ++j) {
      int n = std::max(i, j);
      double env = C * (std::pow(kd.envelope_delta, n) + gamma_at(n));
      CHECK(second_order(system, phi, i, j) <= env * 1.5 + 1e-12);
    }
}

TEST_CASE("azuma bound plug-in values and monotonicity") {
  MartingaleDecomposition dec;
  dec.u_sup = 1.0;
  dec.a1 = 0.0;
  dec.a2 = 2.0;
  dec.a3 = 1.0 / (4.0 * dec.u_sup * dec.u_sup);
  CHECK(azuma_bound(dec, 100, 0.0) >= 1.0);
  CHECK(azuma_bound(dec, 100, 1.0) == doctest::Approx(2.0 * std::exp(-25.0)).epsilon(1e-12));

  MartingaleDecomposition wide = dec;
  wide.u_sup = 2.0;
  wide.a3 = 1.0 / (4.0 * wide.u_sup * wide.u_sup);
  CHECK(azuma_bound(wide, 100, 1.0) > azuma_bound(dec, 100, 1.0));
}
