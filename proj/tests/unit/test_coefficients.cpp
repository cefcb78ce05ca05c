#include <gtest/gtest.h>

#include <cmath>

#include "nmpdee/coefficients.hpp"
#include "nmpdee/errors.hpp"

using namespace nmpdee;

TEST(PhiKernel, HandValues) {
  EXPECT_NEAR(phi_kernel(1.0, 0.0, HurstParameter(0.8)), 0.48, 1e-15);
  EXPECT_EQ(phi_kernel(1.0, 0.0, HurstParameter(0.5)), 0.0);
  EXPECT_EQ(phi_kernel(2.0, 1.0, HurstParameter(0.7)), phi_kernel(1.0, 2.0, HurstParameter(0.7)));
}

TEST(CHat, ConstantClosedForm) {
  const auto c = TimeField::constant(0.25);
  EXPECT_NEAR(c_hat(1.0, c, HurstParameter(0.8)), 0.05, 1e-15);
  EXPECT_NEAR(c_hat_quadrature(1.0, c, HurstParameter(0.8)), 0.05, 1e-10);
}

TEST(CHat, PowerLawClosedForm) {
  const double c = 0.25, d = 0.8, h = 0.8;
  const auto field = TimeField::power_law(c, d);
  const double expected = c * c * h * std::tgamma(2 * h) * std::tgamma(1 + d) / std::tgamma(d + 2 * h);
  EXPECT_NEAR(c_hat(1.0, field, HurstParameter(h)), expected, 1e-14);
  EXPECT_NEAR(expected, 3.35e-2, 5e-4);
}

TEST(CHat, BrownianIsZero) {
  EXPECT_EQ(c_hat(1.3, TimeField::power_law(2.0, 0.5), HurstParameter(0.5)), 0.0);
  EXPECT_EQ(c_hat(1.3, TimeField::custom([](double t) { return 1.0 + t; }), HurstParameter(0.5)), 0.0);
}

TEST(CHat, ClosedFormsAgreeWithQuadrature) {
  for (double h : {0.6, 0.7, 0.8, 0.9}) {
    for (double t : {0.1, 0.5, 1.0, 2.0}) {
      for (const auto& field : {TimeField::constant(0.25), TimeField::power_law(0.25, 0.8)}) {
        const double closed = c_hat(t, field, HurstParameter(h));
        const double quad = c_hat_quadrature(t, field, HurstParameter(h));
        EXPECT_NEAR(quad / closed, 1.0, 1e-8) << "H=" << h << " t=" << t;
      }
    }
  }
}

TEST(CHat, CustomFieldUsesQuadrature) {
  const double h = 0.75, t = 1.5;
  const auto field = TimeField::custom([](double s) { return 1.0 + s; });
  const double e = 2 * h - 1;
  // int_0^t (t-r)^{e-1} (1 + r) dr with 1 + r = (1 + t) - (t - r).
  const double integral = (1.0 + t) * std::pow(t, e) / e - std::pow(t, e + 1) / (e + 1);
  const double expected = (1.0 + t) * h * e * integral;
  EXPECT_NEAR(c_hat(t, field, HurstParameter(h)) / expected, 1.0, 1e-8);
}

TEST(CHat, RejectsNonPositiveTime) {
  EXPECT_THROW(c_hat(0.0, TimeField::constant(1.0), HurstParameter(0.7)), DomainError);
}

TEST(Pdee, DoubleWellFpk) {
  const auto m = SdeModel::pure_gwn(StateField::polynomial({0, 1, 0, -1}), StateField::constant(1.0), 0.0);
  const auto c = build_pdee(m);
  EXPECT_EQ(c.derivation, Derivation::FpkStratonovich);
  EXPECT_TRUE(c.time_independent);
  for (double x : {-2.0, -0.3, 0.0, 1.7}) {
    EXPECT_NEAR(c.d1(x, 0.4), x - x * x * x, 1e-14);
    EXPECT_NEAR(c.d1_x(x, 0.4), 1 - 3 * x * x, 1e-14);
    EXPECT_NEAR(c.d2(x, 0.4), 0.5, 1e-15);
    EXPECT_EQ(c.d2_x(x, 0.4), 0.0);
    EXPECT_EQ(c.d2_xx(x, 0.4), 0.0);
  }
}

TEST(Pdee, LinearConstantCoefficients) {
  const double a = -0.5, b = 0.25, cc = 0.25, h = 0.8;
  const auto m = SdeModel::linear(TimeField::constant(a), TimeField::constant(b), TimeField::constant(cc),
                                  HurstParameter(h), 2.0);
  const auto c = build_pdee(m);
  EXPECT_EQ(c.derivation, Derivation::LinearTimeVarying);
  for (double t : {0.1, 1.0, 2.5}) {
    const double mem = h * std::pow(t, 2 * h - 1) * cc * cc;
    for (double x : {0.2, 1.0, 3.0}) {
      EXPECT_NEAR(c.d1(x, t), (a + 0.5 * b * b + mem) * x, 1e-12);
      EXPECT_NEAR(c.d2(x, t), (0.5 * b * b + mem) * x * x, 1e-12);
      EXPECT_NEAR(c.d2_x(x, t), 2 * (0.5 * b * b + mem) * x, 1e-12);
      EXPECT_NEAR(c.d2_xx(x, t), 2 * (0.5 * b * b + mem), 1e-12);
    }
  }
}

TEST(Pdee, FgnOnlySqrtQuadratic) {
  const double s = 0.1, h = 0.8;
  StateField hf{[s](double, double x) { return std::sqrt(1 + s * x * x); },
                [s](double, double x) { return s * x / std::sqrt(1 + s * x * x); },
                [s](double, double x) { return s / std::pow(1 + s * x * x, 1.5); }, true};
  const auto c = build_pdee(SdeModel::pure_fgn(hf, HurstParameter(h), 0.0));
  EXPECT_EQ(c.derivation, Derivation::FgnOnly);
  for (double t : {0.2, 0.5, 1.0}) {
    const double k = h * std::pow(t, 2 * h - 1);
    for (double x : {-3.0, 0.0, 1.5}) {
      EXPECT_NEAR(c.d1(x, t), k * s * x, 1e-14);
      EXPECT_NEAR(c.d2(x, t), k * (1 + s * x * x), 1e-14);
    }
  }
}

TEST(Pdee, LinearAndCommutativeAgreeOnOverlap) {
  const double a = -0.5, b = 0.25, cc = 0.4, h = 0.7;
  const auto lin = build_pdee(SdeModel::linear(TimeField::constant(a), TimeField::constant(b),
                                               TimeField::constant(cc), HurstParameter(h), 1.0));
  const auto com = build_pdee(SdeModel::nonlinear_commutative(StateField::linear(a), StateField::linear(b),
                                                              StateField::linear(cc), HurstParameter(h), 1.0));
  EXPECT_EQ(com.derivation, Derivation::Commutative);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = -3.0 + 6.0 * i / 99.0;
    for (int j = 0; j < 10; ++j) {
      const double t = 0.1 + 0.3 * j;
      worst = std::max({worst, std::abs(lin.d1(x, t) - com.d1(x, t)), std::abs(lin.d2(x, t) - com.d2(x, t)),
                        std::abs(lin.d2_x(x, t) - com.d2_x(x, t)), std::abs(lin.d2_xx(x, t) - com.d2_xx(x, t))});
    }
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Pdee, FgnFactorNearBrownianLimit) {
  EXPECT_NEAR(fgn_time_factor(1.0, HurstParameter(0.5 + 1e-9)), 0.5, 1e-8);
  const double k = fgn_time_factor(1.0, HurstParameter(0.5));
  EXPECT_DOUBLE_EQ(k, 0.5);
  EXPECT_EQ(fgn_time_factor(0.0, HurstParameter(0.8)), 0.0);
}

TEST(Pdee, DiffusionNonNegativeOnExperimentDomains) {
  const double d = 0.5;
  auto cubic = [d](double k) { return StateField::polynomial({0.0, k, 0.0, -k * d}); };
  const auto c = build_pdee(SdeModel::nonlinear_commutative(cubic(-1.0), cubic(0.5), cubic(0.5), HurstParameter(0.8), 0.4));
  for (int i = 0; i <= 60; ++i) {
    for (double t : {0.01, 0.5, 1.0}) EXPECT_GE(c.d2(1.5 * i / 60.0, t), 0.0);
  }
}

TEST(Commutativity, ProportionalFieldsPass) {
  const double d = 0.5;
  auto cubic = [d](double k) { return StateField::polynomial({0.0, k, 0.0, -k * d}); };
  const auto m = SdeModel::nonlinear_commutative(cubic(-1.0), cubic(0.5), cubic(0.3), HurstParameter(0.8), 0.4);
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(-2.0 + 0.1 * i);
  const auto r = check_commutativity(m, grid, 1e-8);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.max_residual, 1e-12);
}

TEST(Commutativity, MismatchFails) {
  const auto m = SdeModel::nonlinear_commutative(StateField::linear(1.0), StateField::constant(1.0),
                                                 StateField::zero(), HurstParameter(0.7), 0.0);
  std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0};
  const auto r = check_commutativity(m, grid, 1e-8);
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.max_residual, 1.0, 1e-14);
  EXPECT_THROW(build_pdee(m), DomainError);
}

TEST(Commutativity, ZeroFieldsPass) {
  const auto m = SdeModel::nonlinear_commutative(StateField::zero(), StateField::zero(), StateField::zero(),
                                                 HurstParameter(0.7), 0.0);
  std::vector<double> grid{-1.0, 0.0, 1.0};
  EXPECT_TRUE(check_commutativity(m, grid, 1e-8).pass);
}
