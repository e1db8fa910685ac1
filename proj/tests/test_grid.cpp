#include <doctest.h>

#include <random>

#include "rdslab/grid.hpp"
#include "rdslab/rng.hpp"

using rdslab::GridFunction;

namespace {

GridFunction random_step(int resolution, std::mt19937_64& rng) {
  GridFunction g(resolution);
  for (int i = 0; i < resolution; ++i) g[i] = 2.0 * rdslab::uniform01(rng) - 1.0;
  return g;
}

}  // namespace

TEST_CASE("bv norms of the constant function") {
  GridFunction one(4, 1.0);
  auto n = one.bv_norms();
  CHECK(n.l1 == doctest::Approx(1.0));
  CHECK(n.variation == 0.0);
  CHECK(n.sup == doctest::Approx(1.0));
  CHECK(n.bv == doctest::Approx(1.0));
}

TEST_CASE("bv norms of the centered half indicator at N=4") {
  GridFunction g(std::vector<double>{0.5, 0.5, -0.5, -0.5});
  auto n = g.bv_norms();
  CHECK(n.l1 == doctest::Approx(0.5));
  CHECK(n.variation == doctest::Approx(1.0));
  CHECK(n.sup == doctest::Approx(0.5));
  CHECK(n.bv == doctest::Approx(1.5));
}

TEST_CASE("variation is homogeneous") {
  std::mt19937_64 rng(7);
  GridFunction g = random_step(12, rng);
  CHECK((g * 2.0).variation() == doctest::Approx(2.0 * g.variation()));
}

TEST_CASE("refinement preserves l1, sup and variation exactly") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    GridFunction g = random_step(6, rng);
    GridFunction fine = g.refine(5);
    CHECK(fine.resolution() == 30);
    CHECK(fine.l1_norm() == doctest::Approx(g.l1_norm()).epsilon(1e-14));
    CHECK(fine.sup_norm() == doctest::Approx(g.sup_norm()).epsilon(1e-14));
    CHECK(fine.variation() == doctest::Approx(g.variation()).epsilon(1e-14));
    CHECK(fine.integral() == doctest::Approx(g.integral()).epsilon(1e-14));
  }
}

TEST_CASE("sup bounded by bv norm (C0 = 1) on random functions") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    GridFunction g = random_step(16, rng);
    CHECK(g.sup_norm() <= g.bv_norm() + 1e-14);
  }
}

TEST_CASE("product variation inequality v(fg) <= sup f v(g) + sup g v(f)") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    GridFunction f = random_step(10, rng);
    GridFunction g = random_step(10, rng);
    double lhs = (f * g).variation();
    double rhs = f.sup_norm() * g.variation() + g.sup_norm() * f.variation();
    CHECK(lhs <= rhs + 1e-12);
  }
}

TEST_CASE("alignment refines to the lcm resolution") {
  GridFunction a(4, 1.0);
  GridFunction b(6, 2.0);
  GridFunction c = a * b;
  CHECK(c.resolution() == 12);
  CHECK(c.integral() == doctest::Approx(2.0));
}

TEST_CASE("eval uses right-open cells") {
  GridFunction g(std::vector<double>{1.0, 2.0});
  CHECK(g.eval(0.0) == 1.0);
  CHECK(g.eval(0.499999) == 1.0);
  CHECK(g.eval(0.5) == 2.0);
  CHECK_THROWS_AS(g.eval(1.0), rdslab::Error);
}
