#include <gtest/gtest.h>

#include <cmath>

#include "asel/nonlinearity.hpp"

using namespace asel;

TEST(Nonlinearity, PowerBasics) {
  const Nonlinearity g = Nonlinearity::power(2.0);
  EXPECT_EQ(g(0.0), 0.0);
  EXPECT_NEAR(g(3.0), 9.0, 1e-14);
  EXPECT_NEAR(g(-3.0), -9.0, 1e-14);
  EXPECT_NEAR(g.derivative(3.0), 6.0, 1e-14);
  const Nonlinearity lin = Nonlinearity::parse("power:1.0");
  EXPECT_NEAR(lin(2.5), 2.5, 1e-15);
  EXPECT_THROW(Nonlinearity::parse("exp:1"), std::invalid_argument);
  EXPECT_THROW(Nonlinearity::power(0.0), std::invalid_argument);
}

TEST(Truncate, BelowCapIsIdentity) {
  const TruncatedNonlinearity gn = truncate(Nonlinearity::power(1.0), 10);
  EXPECT_NEAR(gn(3.0), 3.0, 1e-15);  // g(3) = 3 <= n-1, cap untouched
  EXPECT_NEAR(gn.derivative(3.0), 1.0, 1e-15);
}

TEST(Truncate, SupEqualsLevel) {
  const TruncatedNonlinearity gn = truncate(Nonlinearity::power(3.0), 1);
  double sup = 0.0;
  for (double s = 0.0; s < 50.0; s += 0.01) sup = std::max(sup, gn(s));
  EXPECT_LE(sup, 1.0);
  EXPECT_GT(gn(50.0), 1.0 - 1e-10);  // approaches the cap from below
  EXPECT_THROW(truncate(Nonlinearity::power(2.0), 0), std::invalid_argument);
}

TEST(Truncate, SandwichAndLocalUniformConvergence) {
  const Nonlinearity g = Nonlinearity::power(2.0);
  for (long n = 1; n <= 20; ++n) {
    const TruncatedNonlinearity gn = truncate(g, n);
    const TruncatedNonlinearity gn1 = truncate(g, n + 1);
    for (double s = 0.0; s <= 100.0; s += 0.37) {
      EXPECT_LE(gn(s), gn1(s) + 1e-12);
      EXPECT_LE(gn1(s), g(s) + 1e-12);
      EXPECT_GE(gn(s), -1e-12);
    }
  }
  // max_{|s| <= S} |g_n - g| -> 0 for fixed S
  const double S = 7.0;
  double prev = 1e300;
  for (long n : {8, 16, 32, 64}) {
    const TruncatedNonlinearity gn = truncate(g, n);
    double worst = 0.0;
    for (double s = -S; s <= S; s += 0.01) worst = std::max(worst, std::abs(gn(s) - g(s)));
    EXPECT_LE(worst, prev);
    prev = worst;
  }
  EXPECT_EQ(prev, 0.0);  // cap inactive once n-1 >= g(S) = 49
}

TEST(Truncate, OddAndC1AtCapTransition) {
  const TruncatedNonlinearity gn = truncate(Nonlinearity::power(2.0), 5);
  for (double s = 0.0; s < 10.0; s += 0.1) EXPECT_EQ(gn(-s), -gn(s));
  // derivative continuous across g(s) = n-1 (s = 2 for p=2, n=5)
  const double s_star = 2.0;
  const double left = gn.derivative(s_star - 1e-7);
  const double right = gn.derivative(s_star + 1e-7);
  EXPECT_NEAR(left, right, 1e-5);
  // nondecreasing derivative sign
  for (double s = 0.0; s < 10.0; s += 0.05) EXPECT_GE(gn.derivative(s), 0.0);
}

TEST(CheckSubcritical, PowerClosedForms) {
  // N=2: critical exponent (N+1)/(N-1) = 3
  EXPECT_FALSE(check_subcritical(Nonlinearity::power(3.0), 2).converges);
  EXPECT_FALSE(check_subcritical(Nonlinearity::power(3.5), 2).converges);
  const SubcriticalReport r2 = check_subcritical(Nonlinearity::power(2.0), 2);
  EXPECT_TRUE(r2.converges);
  EXPECT_NEAR(r2.integral_estimate, 1.0, 1e-12);  // int_1^inf s^{-2} ds
  // N=3: q = 2, p = 1.5 -> 1/(q-p) = 2
  const SubcriticalReport r3 = check_subcritical(Nonlinearity::power(1.5), 3);
  EXPECT_TRUE(r3.converges);
  EXPECT_NEAR(r3.integral_estimate, 2.0, 1e-12);
  EXPECT_NEAR(r3.critical_exponent, 2.0, 1e-15);
}

TEST(CheckSubcritical, CustomQuadratureMatchesPowerOracle) {
  // same integrand via the custom path: quadrature vs closed form
  const Nonlinearity g = Nonlinearity::custom([](double s) { return std::pow(std::abs(s), 1.5); },
                                              [](double s) { return 1.5 * std::sqrt(std::abs(s)); });
  const SubcriticalReport rep = check_subcritical(g, 3);
  EXPECT_TRUE(rep.converges);
  EXPECT_NEAR(rep.integral_estimate, 2.0, 1e-3);
}

TEST(CheckStructure, PowerExamples) {
  const Nonlinearity g = Nonlinearity::power(2.0);
  // (s, t) = (0, 1): g(t) term alone gives ratio exactly 1
  EXPECT_NEAR(g(0.0 + 1.0) - g(0.0), 1.0 * (g(0.0) * 1.0 / 1.0 + g(1.0)), 1e-14);
  const StructureReport rep = check_structure(g);
  EXPECT_TRUE(rep.holds);
  EXPECT_GE(rep.c1_estimate, 1.0);

  // dense-grid oracle: c1 estimate within 10% of a 200x200 brute-force scan
  // over +/- s values (same |g(s)| form as the checker)
  double brute = 0.0;
  for (int i = 0; i < 200; ++i) {
    for (int j = 0; j < 200; ++j) {
      for (int sign = -1; sign <= 1; sign += 2) {
        const double s = sign * 1e-3 * std::pow(1e6, i / 199.0);
        const double t = 1e-3 * std::pow(1e6, j / 199.0);
        const double lhs = g(s + t) - g(s);
        const double den = std::abs(g(s)) * t / (1.0 + std::abs(s)) + g(t);
        if (den > 0.0 && lhs > 0.0) brute = std::max(brute, lhs / den);
      }
    }
  }
  EXPECT_NEAR(rep.c1_estimate, brute, 0.1 * brute);
}

TEST(GrowthDecay, PowerRates) {
  // p=2, N=2: g(s) s^{-3} = s^{-1} -> 0
  auto seq = growth_decay(Nonlinearity::power(2.0), 2);
  EXPECT_LT(seq.back().second, 1e-5);
  for (std::size_t i = 1; i < seq.size(); ++i) EXPECT_LE(seq[i].second, seq[i - 1].second);
  // p=2.9, N=2: still decays, slowly
  auto slow = growth_decay(Nonlinearity::power(2.9), 2);
  EXPECT_LT(slow.back().second, slow.front().second);
  // p=3, N=2: boundary case, the ratio is constant
  auto flat = growth_decay(Nonlinearity::power(3.0), 2);
  EXPECT_NEAR(flat.back().second, flat.front().second, 1e-12);
}
