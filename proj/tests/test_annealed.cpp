#include <doctest.h>

#include <random>
#include <vector>

#include "rdslab/annealed.hpp"
#include "rdslab/errors.hpp"
#include "rdslab/rng.hpp"

using namespace rdslab;

namespace {

Eigen::MatrixXd running_P() {
  Eigen::MatrixXd P(2, 2);
  P << 0.9, 0.1, 0.2, 0.8;
  return P;
}

Eigen::MatrixXd iid_P(double p0 = 0.5) {
  Eigen::MatrixXd P(2, 2);
  P << p0, 1 - p0, p0, 1 - p0;
  return P;
}

Cocycle two_symbol_m3(int resolution = 3) {
  return Cocycle(build_chain(running_P()), {m3_example_map(), m3_second_map()}, resolution);
}

Cocycle all_doubling(int resolution = 4) {
  return Cocycle(build_chain(iid_P()), {doubling_map(), doubling_map()}, resolution);
}

SymbolField half_indicator_observable(int symbols, int resolution) {
  GridFunction g(resolution);
  for (int i = 0; i < resolution; ++i) g[i] = (2 * i < resolution) ? 0.5 : -0.5;
  std::vector<GridFunction> members(static_cast<std::size_t>(symbols), g);
  return SymbolField(std::move(members));
}

SymbolField random_observable(const AnnealedSystem& system, int resolution, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int m = system.cocycle().symbol_count();
  SymbolField f(m, resolution, 0.0);
  for (int s = 0; s < m; ++s)
    for (int i = 0; i < resolution; ++i) f[s][i] = 2.0 * uniform01(rng) - 1.0;
  return system.centered(f);
}

}  // namespace

TEST_CASE("conditioned density is 1 when all symbols act by doubling") {
  AnnealedSystem system(all_doubling());
  for (int s = 0; s < 2; ++s) {
    CHECK((system.conditioned_density()[s] - GridFunction(4, 1.0)).sup_norm() < 1e-12);
    CHECK(system.conditioned_density()[s].integral() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("conditioned density matches the eigenvector oracle for one symbol") {
  Eigen::MatrixXd P(1, 1);
  P << 1.0;
  AnnealedSystem system(Cocycle(build_chain(P), {m3_example_map()}, 3));
  const GridFunction& h = system.conditioned_density()[0];
  CHECK(h[0] == doctest::Approx(0.6).epsilon(1e-11));
  CHECK(h[1] == doctest::Approx(1.2).epsilon(1e-11));
  CHECK(h[2] == doctest::Approx(1.2).epsilon(1e-11));
}

TEST_CASE("iid driving gives a symbol-independent conditioned density") {
  AnnealedSystem system(Cocycle(build_chain(iid_P(0.6)), {m3_example_map(), m3_second_map()}, 3));
  const SymbolField& h = system.conditioned_density();
  CHECK((h[0] - h[1]).sup_norm() < 1e-12);
}

TEST_CASE("conditioned density satisfies the forward equivariance identity") {
  AnnealedSystem system(two_symbol_m3());
  const SymbolChain& chain = system.cocycle().chain();
  const SymbolField& h = system.conditioned_density();
  for (int s1 = 0; s1 < 2; ++s1) {
    GridFunction acc(3, 0.0);
    for (int s = 0; s < 2; ++s)
      acc += system.cocycle().apply_transfer(s, h[s]) * (chain.pi(s) * chain.P(s, s1));
    acc *= 1.0 / chain.pi(s1);
    CHECK((acc - h[s1]).sup_norm() < 1e-11);
  }
}

TEST_CASE("conditioned density matches brute-force past averaging") {
  // E[h_w | w_0 = s] by enumerating all pasts of length B with reverse-chain
  // probabilities; memory loss makes the truncation error geometric in B.
  AnnealedSystem system(two_symbol_m3());
  const SymbolChain& chain = system.cocycle().chain();
  const int B = 12;
  for (int s = 0; s < 2; ++s) {
    GridFunction avg(3, 0.0);
    // past = (w_{-B}, ..., w_{-1}); reverse-chain prob of (w_{-1},...,w_{-B} | w_0 = s)
    for (unsigned mask = 0; mask < (1u << B); ++mask) {
      std::vector<int> past;
      for (int k = 0; k < B; ++k) past.push_back((mask >> k) & 1u);  // past[0] = w_{-B}
      double prob = 1.0;
      int anchor = s;
      for (int k = B - 1; k >= 0; --k) {  // walk backwards w_0 -> w_{-1} -> ...
        prob *= chain.reverse(anchor, past[static_cast<std::size_t>(k)]);
        anchor = past[static_cast<std::size_t>(k)];
      }
      if (prob == 0.0) continue;
      avg += path_density(system.cocycle(), past) * prob;
    }
    CHECK((avg - system.conditioned_density()[s]).sup_norm() < 1e-4);
  }
}

TEST_CASE("expectation of constants and centering") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField c(2, 3, 2.5);
  CHECK(system.expectation(c) == doctest::Approx(2.5).epsilon(1e-13));
  SymbolField f = random_observable(system, 3, 42);
  CHECK(std::abs(system.expectation(f)) < 1e-12);
}

TEST_CASE("product_expectation of a single centered slot vanishes") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField f = random_observable(system, 3, 7);
  CHECK(std::abs(system.product_expectation({{0, &f}})) < 1e-12);
}

TEST_CASE("product_expectation equals the enumeration oracle") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField f = random_observable(system, 3, 11);
  SymbolField g = random_observable(system, 3, 13);
  std::vector<std::vector<ProductSlot>> cases = {
      {{0, &f}, {1, &g}},
      {{0, &f}, {2, &g}, {3, &f}},
      {{1, &g}, {4, &f}},
      {{0, &f}, {1, &f}, {2, &g}, {4, &g}},
  };
  for (const auto& slots : cases) {
    double fast = system.product_expectation(slots);
    double oracle = product_expectation_enumeration(system, slots);
    CHECK(fast == doctest::Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("iid x-independent centered constants decorrelate exactly") {
  AnnealedSystem system(Cocycle(build_chain(iid_P(0.5)), {doubling_map(), doubling_map()}, 2));
  SymbolField c(2, 2, 0.0);
  c[0] += 1.0;
  c[1] += -1.0;  // centered under pi = (1/2, 1/2)
  for (int k = 1; k <= 4; ++k) {
    std::vector<ProductSlot> slots{{0, &c}, {k, &c}};
    CHECK(std::abs(system.product_expectation(slots)) < 1e-13);
  }
}

TEST_CASE("stationarity: shifted product expectations agree") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField f = random_observable(system, 3, 17);
  for (int shift = 1; shift <= 3; ++shift) {
    std::vector<ProductSlot> base{{0, &f}, {2, &f}};
    std::vector<ProductSlot> shifted{{shift, &f}, {2 + shift, &f}};
    CHECK(system.product_expectation(base) ==
          doctest::Approx(system.product_expectation(shifted)).epsilon(1e-12));
  }
}

TEST_CASE("b_1 vanishes for the doubling map with the half indicator") {
  AnnealedSystem system(all_doubling());
  SymbolField phi = half_indicator_observable(2, 4);
  CHECK(std::abs(system.expectation(phi)) < 1e-13);
  CHECK(system.correlation(phi, 1) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(system.correlation(phi, 0) == doctest::Approx(0.25).epsilon(1e-13));
}

TEST_CASE("horizon cap raises HorizonTooLarge") {
  AnnealedSystem system(all_doubling());
  SymbolField phi = half_indicator_observable(2, 4);
  std::vector<ProductSlot> slots{{0, &phi}, {61, &phi}};
  CHECK_THROWS_AS(system.product_expectation(slots), Error);
}

TEST_CASE("coboundary observable has vanishing asymptotic variance") {
  Cocycle cocycle = two_symbol_m3();
  AnnealedSystem system(cocycle);
  GridFunction r(std::vector<double>{0.8, -0.3, 0.1});
  SymbolField phi = coboundary_observable(cocycle, r);
  CHECK(std::abs(system.expectation(phi)) < 1e-12);
  VarianceResult var = system.asymptotic_variance(phi, 40);
  CHECK(std::abs(var.s2) < 1e-8);
}

TEST_CASE("iid constants give s^2 = sum pi_s c_s^2") {
  AnnealedSystem system(Cocycle(build_chain(iid_P(0.5)), {doubling_map(), doubling_map()}, 2));
  SymbolField c(2, 2, 0.0);
  c[0] += 1.0;
  c[1] += -1.0;
  VarianceResult var = system.asymptotic_variance(c, 30);
  CHECK(var.s2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lemma-style variance inequality holds exactly for n <= 60") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_observable(system, 3, 19);
  std::vector<double> b = system.correlation_series(phi, 60);
  VarianceResult var = system.asymptotic_variance(phi, 60);
  double weighted_tail = 0.0;
  for (std::size_t k = 1; k < b.size(); ++k) weighted_tail += static_cast<double>(k) * std::abs(b[k]);
  for (int n = 10; n <= 60; n += 10) {
    double lhs = std::abs(system.exact_sn2(b, n) / n - var.s2);
    CHECK(lhs <= 2.0 * weighted_tail / n + var.tail_bound + 1e-12);
  }
}

TEST_CASE("moment recursion matches the tuple-expansion oracle at n=3, p=3") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_observable(system, 3, 23);
  MomentsResult mom = system.moments_cumulants(phi, 3, 3);
  for (int p = 1; p <= 3; ++p) {
    double oracle = moment_enumeration(system, phi, 3, p);
    CHECK(mom.moments[static_cast<std::size_t>(p)] == doctest::Approx(oracle).epsilon(1e-11));
  }
}

TEST_CASE("second moment from the recursion equals the b_k assembly") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_observable(system, 3, 29);
  std::vector<double> b = system.correlation_series(phi, 80);
  for (int n : {5, 20, 60}) {
    MomentsResult mom = system.moments_cumulants(phi, n, 2);
    CHECK(mom.moments[2] == doctest::Approx(system.exact_sn2(b, n)).epsilon(1e-11));
  }
}

TEST_CASE("first cumulant vanishes for centered observables") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_observable(system, 3, 31);
  MomentsResult mom = system.moments_cumulants(phi, 12, 4);
  CHECK(std::abs(mom.cumulants[1]) < 1e-11);
  CHECK(mom.cumulants[2] == doctest::Approx(mom.moments[2]).epsilon(1e-10));
}

TEST_CASE("flip-symmetric observable kills the third cumulant") {
  AnnealedSystem system(all_doubling());
  GridFunction g(std::vector<double>{0.7, 0.2, -0.2, -0.7});  // phi(1-x) = -phi(x)
  SymbolField phi(std::vector<GridFunction>{g, g});
  for (int n : {4, 8, 16}) {
    MomentsResult mom = system.moments_cumulants(phi, n, 4);
    CHECK(std::abs(mom.cumulants[3]) < 1e-10);
  }
}

TEST_CASE("multi_correlation basics") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_observable(system, 3, 37);

  MultiCorrelationResult single = system.multi_correlation(phi, {{0, 1, 2}});
  CHECK(single.lhs == doctest::Approx(0.0).epsilon(1e-13));

  MultiCorrelationResult pair = system.multi_correlation(phi, {{0, 1}, {5, 6}});
  CHECK(pair.r.size() == 1);
  CHECK(pair.r[0] == 1);  // gap 3 -> floor(3/3)
  CHECK(pair.lhs >= 0.0);

  CHECK_THROWS_AS(system.multi_correlation(phi, {{0, 1}, {1, 2}}), Error);
}

TEST_CASE("two-block correlation gap decays geometrically in the gap") {
  AnnealedSystem system(two_symbol_m3());
  SymbolField phi = random_observable(system, 3, 41);
  std::vector<double> lhs;
  for (int gap = 1; gap <= 12; ++gap)
    lhs.push_back(system.multi_correlation(phi, {{0}, {1 + gap}}).lhs);
  // ratio over 3 steps must drop clearly below 1
  for (std::size_t k = 3; k < lhs.size(); ++k)
    if (lhs[k - 3] > 1e-13) CHECK(lhs[k] <= 0.75 * lhs[k - 3] + 1e-13);
}

TEST_CASE("covariance matrix polarization, PSD, and the null direction") {
  Cocycle cocycle = two_symbol_m3();
  AnnealedSystem system(cocycle);
  SymbolField phi1 = random_observable(system, 3, 43);
  GridFunction r(std::vector<double>{0.4, -0.2, 0.3});
  SymbolField cob = coboundary_observable(cocycle, r);
  SymbolField phi3 = random_observable(system, 3, 47);

  CovarianceResult cov = system.covariance_matrix({phi1, cob, phi3}, 50);
  CHECK(cov.sigma2(0, 0) == doctest::Approx(system.asymptotic_variance(phi1, 50).s2).epsilon(1e-10));
  CHECK((cov.sigma2 - cov.sigma2.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(cov.eigenvalues.minCoeff() > -1e-10);
  REQUIRE(cov.null_directions.size() == 1);
  Eigen::VectorXd v = cov.eigenvectors.col(cov.null_directions[0]);
  if (v(1) < 0) v = -v;
  CHECK(std::abs(v(0)) < 1e-6);
  CHECK(std::abs(v(1) - 1.0) < 1e-6);
  CHECK(std::abs(v(2)) < 1e-6);
}

TEST_CASE("fixpoint diagnostics are recorded") {
  AnnealedSystem system(two_symbol_m3());
  CHECK(system.fixpoint_residual() < 1e-12);
  CHECK(system.fixpoint_iterations() > 1);
}
