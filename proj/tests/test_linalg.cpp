#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "adl/linalg.hpp"
#include "adl/parallel.hpp"
#include "adl/rng.hpp"

using namespace adl;

TEST(Linalg, DeterminantAndInverse) {
  Matrix m{{2, 1}, {0, 3}};
  EXPECT_DOUBLE_EQ(determinant(m), 6.0);
  Matrix inv = inverse(m);
  EXPECT_LT(max_abs_diff(m * inv, Matrix::identity(2)), 1e-15);
  EXPECT_THROW(inverse(Matrix{{1, 2}, {2, 4}}), Error);
}

TEST(Linalg, PowersAgreeWithRepeatedProducts) {
  Matrix m{{1.5, 0.25}, {-0.5, 2.0}};
  Matrix inv = inverse(m);
  Matrix acc = Matrix::identity(2);
  for (int e = 0; e <= 9; ++e) {
    EXPECT_LT(max_abs_diff(power(m, inv, e), acc), 1e-9 * acc.max_abs()) << e;
    acc = acc * m;
  }
  EXPECT_LT(max_abs_diff(power(m, inv, -3) * power(m, inv, 3), Matrix::identity(2)), 1e-12);
}

TEST(Linalg, OperatorNormClosedForms) {
  EXPECT_NEAR(operator_norm(Matrix::diagonal({3, -5})).value, 5.0, 1e-12);
  EXPECT_NEAR(operator_norm(Matrix::scaled_rotation(2, 1.0)).value, 2.0, 1e-12);
  // 2x2: sigma_max^2 = (t + sqrt(t^2 - 4 det^2)) / 2 with t = ||M||_F^2.
  Matrix m{{1, 2}, {3, 4}};
  double t = 30.0, det = -2.0;
  double expect = std::sqrt((t + std::sqrt(t * t - 4 * det * det)) / 2);
  auto r = operator_norm(m);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, expect, 1e-10);
}

TEST(Linalg, OperatorNormStartInKernel) {
  // All-ones start lies in the kernel of M^T M for this matrix.
  Matrix m{{1, -1}, {1, -1}};
  EXPECT_NEAR(operator_norm(m).value, 2.0, 1e-10);
}

TEST(Linalg, SpectrumModuli) {
  auto s = spectrum(Matrix::scaled_rotation(2, 1.0));
  ASSERT_EQ(s.moduli.size(), 2u);
  EXPECT_NEAR(s.moduli[0], 2.0, 1e-12);
  EXPECT_NEAR(s.moduli[1], 2.0, 1e-12);

  auto t = spectrum(Matrix{{1, 1}, {0, 2}});
  EXPECT_NEAR(t.moduli[0], 1.0, 1e-12);
  EXPECT_NEAR(t.moduli[1], 2.0, 1e-12);

  Matrix c(3, {2, 0, 0, 0, 0, -3, 0, 3, 0});
  auto u = spectrum(c);
  EXPECT_NEAR(u.moduli[0], 2.0, 1e-10);
  EXPECT_NEAR(u.moduli[1], 3.0, 1e-10);
  EXPECT_NEAR(u.moduli[2], 3.0, 1e-10);

  // 4x4 block diagonal: rotation block (modulus 2) and diag(3, 5).
  const double cs = 2 * std::cos(0.7), sn = 2 * std::sin(0.7);
  Matrix d(4, {cs, -sn, 0, 0, sn, cs, 0, 0, 0, 0, 3, 0, 0, 0, 0, 5});
  auto v = spectrum(d);
  ASSERT_EQ(v.moduli.size(), 4u);
  EXPECT_NEAR(v.moduli[0], 2.0, 1e-8);
  EXPECT_NEAR(v.moduli[1], 2.0, 1e-8);
  EXPECT_NEAR(v.moduli[2], 3.0, 1e-8);
  EXPECT_NEAR(v.moduli[3], 5.0, 1e-8);
}

TEST(Linalg, CompensatedDot) {
  std::vector<double> x{1e16, 1.0, -1e16}, y{1.0, 1.0, 1.0};
  EXPECT_EQ(dot2(x, y), 1.0);
}

TEST(Rng, CounterStreamsAreReproducible) {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) {
    auto va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    EXPECT_NE(va, c.next_u64());
  }
  CounterRng u(1, 0);
  for (int i = 0; i < 1000; ++i) {
    double v = u.uniform();
    EXPECT_GE(v, 0.0);
    EXPECT_LT(v, 1.0);
    auto k = u.uniform_int(-3, 3);
    EXPECT_GE(k, -3);
    EXPECT_LE(k, 3);
  }
}

TEST(Rng, NormalMoments) {
  CounterRng r(5, 0);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Parallel, ResultsIndependentOfWorkers) {
  std::vector<double> ref;
  for (int t : {1, 3, 8}) {
    set_thread_count(t);
    std::vector<double> out(1000);
    parallel_for(out.size(), [&](std::size_t i) { out[i] = CounterRng(9, i).uniform(); });
    double s = tree_sum(out);
    if (ref.empty()) ref.push_back(s);
    EXPECT_EQ(s, ref[0]);
  }
  set_thread_count(0);
}

TEST(Parallel, LowestIndexErrorWins) {
  set_thread_count(4);
  try {
    parallel_for(100, [](std::size_t i) {
      if (i % 7 == 3) throw std::runtime_error(std::to_string(i));
    });
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "3");
  }
  set_thread_count(0);
}
