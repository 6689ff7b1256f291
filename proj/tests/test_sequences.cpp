#include <cmath>
#include <map>

#include <gtest/gtest.h>

#include "adl/sequences.hpp"

using namespace adl;

namespace {
Dilation two_i() { return validate_dilation(Matrix::diagonal({2, 2})); }
Dilation two_r1() { return validate_dilation(Matrix::scaled_rotation(2, 1.0)); }

SparseSequence single(std::int64_t j, IntVec k, double v) {
  SparseSequence c(2);
  c.set(j, k, v);
  return c;
}

TLParams tl(double alpha, Exponent p, Exponent q) { return {alpha, p, q}; }

// Independent oracle for A = 2I: the field is constant on finest dyadic
// squares, so the p-integral is a finite sum over those squares.
double dyadic_oracle(const SparseSequence& c, double alpha, double p, double q) {
  const std::int64_t jf = c.j_min();
  std::map<IntVec, std::vector<std::pair<std::int64_t, double>>> fine;
  for (const auto& [j, slice] : c.scales())
    for (const auto& [k, v] : slice) {
      const std::int64_t f = std::int64_t{1} << (j - jf);
      for (std::int64_t a = 0; a < f; ++a)
        for (std::int64_t b = 0; b < f; ++b) fine[{k[0] * f + a, k[1] * f + b}].push_back({j, v});
    }
  double total = 0.0;
  const double cell = std::pow(4.0, static_cast<double>(jf));
  for (const auto& [k, vals] : fine) {
    double s = 0.0;
    for (auto [j, v] : vals) s += std::pow(std::pow(4.0, -j * (alpha + 0.5)) * v, q);
    total += std::pow(s, p / q) * cell;
  }
  return std::pow(total, 1.0 / p);
}
}  // namespace

TEST(Sequence, StoresModuli) {
  SparseSequence c(2);
  c.set(0, {0, 0}, -2.0);
  c.set_complex(1, {0, 0}, 3.0, 4.0);
  c.set(2, {0, 0}, 0.0);
  EXPECT_EQ(c.get(0, {0, 0}), 2.0);
  EXPECT_EQ(c.get(1, {0, 0}), 5.0);
  EXPECT_EQ(c.size(), 2u);
  EXPECT_TRUE(c.moduli_taken());
  EXPECT_THROW(c.set(0, {0}, 1.0), Error);
}

TEST(Exponent, Parse) {
  EXPECT_TRUE(parse_exponent("inf").is_inf());
  EXPECT_EQ(parse_exponent("0.5").value(), 0.5);
  EXPECT_THROW(parse_exponent("-1"), Error);
  EXPECT_THROW(parse_exponent("abc"), Error);
}

TEST(Integrand, Examples) {
  auto a = two_i();
  auto c = single(0, {0, 0}, 1.0);
  EXPECT_EQ(integrand(a, tl(0, 2, 2), c, Vec{0.5, 0.5}), 1.0);
  EXPECT_EQ(integrand(a, tl(0, 2, 2), c, Vec{1.5, 0.5}), 0.0);
  c.set(1, {0, 0}, 1.0);
  EXPECT_NEAR(integrand(a, tl(0, 2, 2), c, Vec{0.5, 0.5}), std::sqrt(1.25), 1e-15);
  EXPECT_NEAR(integrand(a, tl(0, 2, Exponent::infinity()), c, Vec{0.5, 0.5}), 1.0, 1e-15);
}

TEST(ExactPQ, Examples) {
  auto a = two_i();
  EXPECT_NEAR(seqnorm_exact_pq(two_r1(), tl(0, 2, 2), single(0, {0, 0}, 1.0)).value, 1.0, 1e-15);
  auto c = single(0, {0, 0}, 1.0);
  c.set(1, {0, 0}, 1.0);
  EXPECT_NEAR(seqnorm_exact_pq(a, tl(0, 2, 2), c).value, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(seqnorm_exact_pq(a, tl(0, 1, 1), single(1, {0, 0}, 1.0)).value, 2.0, 1e-14);
}

TEST(ExactPQ, DependsOnlyOnDeterminant) {
  auto c = random_sequence(two_i(), Box{{-2, -2}, {2, 2}}, -1, 1, 0.4, 5);
  for (double p : {0.5, 1.0, 2.0}) {
    double x = seqnorm(two_i(), tl(0.3, p, p), c).value;
    double y = seqnorm(two_r1(), tl(0.3, p, p), c).value;
    EXPECT_NEAR(x, y, 1e-12 * x);
  }
}

TEST(SingleEntry, AllRegimes) {
  const Exponent inf = Exponent::infinity();
  for (auto a : {two_i(), two_r1(), validate_dilation(Matrix::diagonal({2, 3}))}) {
    for (std::int64_t j : {-1, 0, 2}) {
      for (double alpha : {-0.5, 0.0, 1.0}) {
        for (Exponent p : {Exponent(0.5), Exponent(1), Exponent(2), inf}) {
          for (Exponent q : {Exponent(1), Exponent(4), inf}) {
            auto c = single(j, {1, -1}, 2.5);
            double ip = p.is_inf() ? 0.0 : 1.0 / p.value();
            double expect = std::pow(a.detmag(), -j * (alpha + 0.5 - ip)) * 2.5;
            auto est = seqnorm(a, tl(alpha, p, q), c);
            EXPECT_NEAR(est.value, expect, 1e-12 * expect);
          }
        }
      }
    }
  }
}

TEST(SingleEntry, PInfinityByQuadratureAttainsOwnCube) {
  auto a = two_i();
  auto c = single(1, {0, 1}, 3.0);
  QuadratureSpec qs;
  qs.method = QuadratureSpec::Method::Grid;
  auto est = seqnorm(a, tl(0, Exponent::infinity(), 1), c, qs);
  EXPECT_NEAR(est.value, std::pow(4.0, -0.5) * 3.0, 1e-12);
  ASSERT_TRUE(est.argmax_cube.has_value());
  EXPECT_EQ(est.argmax_cube->first, 1);
  EXPECT_EQ(est.argmax_cube->second, (IntVec{0, 1}));
}

TEST(Grid, MatchesDyadicOracle) {
  auto a = two_i();
  QuadratureSpec grid;
  grid.method = QuadratureSpec::Method::Grid;
  grid.n = 2;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto c = random_sequence(a, Box{{-1, -1}, {1, 1}}, -2, 1, 0.4, s);
    if (c.empty()) continue;
    for (auto [p, q] : {std::pair{2.0, 1.0}, {1.0, 2.0}, {2.0, 4.0}}) {
      double oracle = dyadic_oracle(c, 0.0, p, q);
      EXPECT_NEAR(seqnorm(a, tl(0, p, q), c, grid).value, oracle, 1e-10 * oracle);
      EXPECT_NEAR(seqnorm_dyadic(a, tl(0, p, q), c).value, oracle, 1e-10 * oracle);
    }
  }
}

TEST(Grid, ClosedFormWithinTolerance) {
  auto a = two_r1();
  QuadratureSpec grid;
  grid.method = QuadratureSpec::Method::Grid;
  for (std::uint64_t s = 0; s < 5; ++s) {
    auto c = random_sequence(a, Box{{-1, -1}, {1, 1}}, -1, 1, 0.5, s);
    double exact = seqnorm(a, tl(0, 2, 2), c).value;
    auto est = seqnorm(a, tl(0, 2, 2), c, grid);
    EXPECT_NEAR(est.value, exact, 0.02 * exact);
  }
}

TEST(MonteCarlo, AgreesWithGrid) {
  auto a = two_r1();
  auto c = random_sequence(a, Box{{-1, -1}, {1, 1}}, -1, 1, 0.5, 3);
  QuadratureSpec mc;
  mc.method = QuadratureSpec::Method::MonteCarlo;
  mc.seed = 5;
  mc.mc_samples = 256;
  auto m = seqnorm(a, tl(0, 2, 1), c, mc);
  auto g = seqnorm(a, tl(0, 2, 1), c);
  EXPECT_EQ(m.method, NormMethod::MonteCarlo);
  EXPECT_NEAR(m.value, g.value, 0.03 * g.value);
  EXPECT_EQ(m.value, seqnorm(a, tl(0, 2, 1), c, mc).value);
}

TEST(Seqnorm, Homogeneous) {
  auto a = two_r1();
  auto c = random_sequence(a, Box{{-1, -1}, {1, 1}}, -1, 0, 0.5, 8);
  double x = seqnorm(a, tl(0, 2, 1), c).value;
  double y = seqnorm(a, tl(0, 2, 1), c.scaled(3.0)).value;
  EXPECT_NEAR(y, 3.0 * x, 1e-12 * y);
}

TEST(Seqnorm, UnresolvedFlagWhenRefinementCapped) {
  auto a = two_r1();
  auto c = random_sequence(a, Box{{-1, -1}, {1, 1}}, -1, 1, 0.5, 2);
  QuadratureSpec qs;
  qs.method = QuadratureSpec::Method::Grid;
  qs.n = 1;
  qs.max_n = 2;
  qs.rel_tol = 1e-9;
  auto est = seqnorm(a, tl(0, 2, 1), c, qs);
  EXPECT_TRUE(est.unresolved);
  EXPECT_GT(est.abs_error, 0.0);
}

TEST(RandomSequence, Examples) {
  auto a = two_i();
  auto c = random_sequence(a, Box{{0, 0}, {2, 2}}, 0, 0, 1.0, 1);
  EXPECT_EQ(c.size(), 4u);
  auto d = random_sequence(a, Box{{-3, -3}, {3, 3}}, -2, 1, 0.3, 9);
  EXPECT_EQ(d, random_sequence(a, Box{{-3, -3}, {3, 3}}, -2, 1, 0.3, 9));
}

TEST(RandomSequence, PopulationWithinBinomialInterval) {
  auto a = two_i();
  // 100 x 100 = 10^4 unit cells.
  auto c = random_sequence(a, Box{{0, 0}, {100, 100}}, 0, 0, 0.5, 9);
  // 99% interval for Binomial(10^4, 1/2): 5000 +- 2.576 * 50.
  EXPECT_GT(c.size(), 4871u);
  EXPECT_LT(c.size(), 5129u);
}

TEST(Seqnorm, DyadicRequiresNesting) {
  EXPECT_TRUE(supports_dyadic(two_i()));
  EXPECT_FALSE(supports_dyadic(two_r1()));
  EXPECT_THROW(seqnorm_dyadic(two_r1(), tl(0, 2, 1), single(0, {0, 0}, 1)), Error);
}
