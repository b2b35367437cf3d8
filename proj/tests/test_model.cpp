#include <gtest/gtest.h>

#include <cmath>

#include "tcmerton/errors.hpp"
#include "tcmerton/model.hpp"

using namespace tcm;

TEST(Market, ThetaIsSharpeRatio) {
  const MarketModel m(0.03, 0.09, 0.2, 1.0);
  EXPECT_DOUBLE_EQ(m.theta(), 0.3);
}

TEST(Market, RejectsNonPositiveSigma) {
  try {
    MarketModel(0.03, 0.09, 0.0, 1.0);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(e.field().find("sigma"), std::string::npos);
  }
}

TEST(Discount, RateMatchesFiniteDifferenceOfH) {
  const double T = 1.0;
  const DiscountModel models[] = {
      DiscountModel::exponential(0.1, T), DiscountModel::hyperbolic(1.0, 2.0, T),
      DiscountModel::hyperbolic(0.5, 3.0, T),
      DiscountModel::pseudo_exponential({0.3, 0.7}, {0.05, 0.4}, T)};
  for (const auto& d : models) {
    for (double t : {0.05, 0.2, 0.6}) {
      for (double s : {t + 0.1, t + 0.3, T}) {
        const double e = 1e-6;
        const double fd = (d.h(t + e, s) - d.h(t - e, s)) / (2 * e);
        EXPECT_NEAR(d.dh_dt(t, s), fd, 1e-7) << d.kind() << " t=" << t << " s=" << s;
        EXPECT_NEAR(d.rho_h(t, s), fd / d.h(t, s), 1e-7);
      }
      EXPECT_DOUBLE_EQ(d.h(t, t), 1.0);
    }
  }
}

TEST(Discount, HyperbolicRateAndRange) {
  const auto d = DiscountModel::hyperbolic(1.0, 2.0, 1.0);
  EXPECT_NEAR(d.rho_h(0.2, 0.7), 2.0 / (1.0 + 2.0 * 0.5), 1e-14);
  EXPECT_DOUBLE_EQ(d.rho_max(), 2.0);
  EXPECT_NEAR(d.rho_min(), 2.0 / 3.0, 1e-14);
  EXPECT_FALSE(d.constant_rate());
  EXPECT_TRUE(DiscountModel::exponential(0.1, 1.0).constant_rate());
}

TEST(Discount, RangeIsAttainedOnALattice) {
  const auto d = DiscountModel::pseudo_exponential({0.3, 0.7}, {0.05, 0.4}, 1.0);
  double lo = 1e300, hi = -1e300;
  for (int a = 0; a <= 100; ++a)
    for (int b = a; b <= 100; ++b) {
      const double r = d.rho_h(a / 100.0, b / 100.0);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  EXPECT_LE(d.rho_min(), lo + 1e-12);
  EXPECT_GE(d.rho_max(), hi - 1e-12);
  EXPECT_GE(d.rho_norm(), std::max(std::abs(lo), std::abs(hi)) - 1e-12);
}

TEST(Discount, OutsideDomainThrows) {
  const auto d = DiscountModel::hyperbolic(1.0, 2.0, 1.0);
  EXPECT_THROW(d.h(0.5, 0.4), DomainError);
  EXPECT_THROW(d.h(0.0, 1.5), DomainError);
}

class UtilityFamilies : public ::testing::TestWithParam<int> {
 protected:
  UtilityModel make() const {
    switch (GetParam()) {
      case 0:
        return UtilityModel::crra(0.5);
      case 1:
        return UtilityModel::crra(-1.0);
      case 2:
        return UtilityModel::mixed_power(0.5, 0.3, -1.0);
      default:
        return UtilityModel::power_mixture({{0.2, 0.6}, {0.5, -0.5}, {0.3, -2.0}});
    }
  }
};

TEST_P(UtilityFamilies, InverseMarginalUndoesMarginal) {
  const auto u = make();
  for (double x : {1e-3, 0.1, 0.5, 1.0, 3.0, 50.0, 1e3}) {
    EXPECT_NEAR(u.I(u.Up(x)) / x, 1.0, 1e-10) << x;
  }
}

TEST_P(UtilityFamilies, DerivativesMatchFiniteDifferences) {
  const auto u = make();
  for (double x : {0.2, 1.0, 4.0}) {
    const double e = 1e-5 * x;
    EXPECT_NEAR(u.Up(x), (u.U(x + e) - u.U(x - e)) / (2 * e), 1e-6 * std::abs(u.Up(x)));
    EXPECT_NEAR(u.Upp(x), (u.Up(x + e) - u.Up(x - e)) / (2 * e), 1e-6 * std::abs(u.Upp(x)));
  }
}

TEST_P(UtilityFamilies, LogCoordinatesAreConsistent) {
  const auto u = make();
  for (double y : {-3.0, -0.5, 0.0, 1.2, 4.0}) {
    const double i0 = u.I(std::exp(y));
    EXPECT_NEAR(u.I0(y) / i0, 1.0, 1e-12);
    EXPECT_NEAR(u.log_I0(y), std::log(i0), 1e-12);
    EXPECT_NEAR(u.U0(y), u.U(i0), 1e-12 * std::max(1.0, std::abs(u.U(i0))));
    const double e = 1e-5;
    EXPECT_NEAR(u.I0p(y), (u.I0(y + e) - u.I0(y - e)) / (2 * e), 1e-6 * std::abs(u.I0p(y)));
    EXPECT_NEAR(u.U0p(y), (u.U0(y + e) - u.U0(y - e)) / (2 * e), 1e-6 * std::abs(u.U0p(y)));
    EXPECT_LT(u.U0p(y), 0.0);
  }
}

TEST_P(UtilityFamilies, RiskAversionWithinDeclaredBounds) {
  const auto u = make();
  EXPECT_NO_THROW(u.validate());
  for (double x = 1e-4; x < 1e4; x *= 1.7) {
    const double ra = -x * u.Upp(x) / u.Up(x);
    EXPECT_NEAR(u.risk_aversion(x), ra, 1e-10 * ra);
    EXPECT_GE(ra, u.r1() * (1 - 1e-12));
    EXPECT_LE(ra, u.r2() * (1 + 1e-12));
  }
}

INSTANTIATE_TEST_SUITE_P(Families, UtilityFamilies, ::testing::Values(0, 1, 2, 3));

TEST(Utility, MixedPowerBounds) {
  const auto u = UtilityModel::mixed_power(0.5, 0.3, -1.0);
  EXPECT_DOUBLE_EQ(u.r1(), 0.7);
  EXPECT_DOUBLE_EQ(u.r2(), 2.0);
  EXPECT_FALSE(u.is_crra());
}

TEST(Utility, OverstatedLowerBoundFailsValidation) {
  const auto u = UtilityModel::mixed_power(0.5, 0.3, -1.0).with_risk_aversion_bounds(0.9, 2.0);
  try {
    u.validate();
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "utility.r1");
  }
}

TEST(Utility, RejectsGammaAtOrAboveOne) {
  EXPECT_THROW(UtilityModel::crra(1.0), ValidationError);
  EXPECT_THROW(UtilityModel::crra(0.0), ValidationError);
}

TEST(ElasticityBounds, ConstantWhenKappaIsZero) {
  const auto u = UtilityModel::mixed_power(0.5, 0.3, -1.0);
  for (double t : {0.0, 0.5, 1.0}) {
    const auto [a, b] = elasticity_bounds(u, 0.0, t, 1.0);
    EXPECT_DOUBLE_EQ(a, 0.7);
    EXPECT_DOUBLE_EQ(b, 2.0);
  }
  const auto [a, b] = elasticity_bounds(u, 2.0, 0.25, 1.0);
  EXPECT_NEAR(a, 0.7 * std::exp(-1.5), 1e-15);
  EXPECT_NEAR(b, 2.0 * std::exp(1.5), 1e-14);
}
