#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "tcmerton/errors.hpp"
#include "tcmerton/fixed_point.hpp"

using namespace tcm;

namespace {

const MarketModel kMarket(0.03, 0.09, 0.2, 1.0);

Problem hyperbolic(const UtilityModel& u) {
  return Problem(kMarket, DiscountModel::hyperbolic(1.0, 2.0, 1.0), u);
}

}  // namespace

TEST(OperatorWeight, TrapezoidPlusTerminalMass) {
  const Grid g(1.0, 11, -1.0, 1.0, 9);
  for (std::size_t i = 0; i < 11; ++i) {
    double sum = 0;
    for (std::size_t j = i; j < 11; ++j) sum += operator_weight(g, i, j);
    EXPECT_NEAR(sum, (1.0 - g.t(i)) + 1.0, 1e-14);
  }
  EXPECT_DOUBLE_EQ(operator_weight(g, 10, 10), 1.0);
}

TEST(ApplyF, ConstantRateCollapses) {
  const Problem p(kMarket, DiscountModel::exponential(0.1, 1.0), UtilityModel::crra(0.5));
  const Grid g(1.0, 41, -6.0, 6.0, 41);
  const auto f = apply_F(p, ScalarField2D(g, 0.0));
  for (double v : f.values()) EXPECT_NEAR(v, 0.1, 1e-13);
  const auto rho = iterate(p, g);
  EXPECT_EQ(rho.iterations, 1u);
  EXPECT_LT(rho.residual_sup, 1e-12);
}

TEST(ApplyF, DenominatorNegativeAndImageInRange) {
  const Problem p = hyperbolic(UtilityModel::mixed_power(0.5, 0.3, -1.0));
  const Grid g(1.0, 41, -6.0, 6.0, 41);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> amp(-0.5, 0.5);
  for (int trial = 0; trial < 4; ++trial) {
    const double a = 1.0 + amp(rng), b = amp(rng), c = amp(rng);
    const auto phi = ScalarField2D::from_function(
        g, [&](double t, double y) { return a + b * std::sin(y) + c * t * std::cos(0.5 * y); });
    const auto ws = build_workspace(p, phi, {}, false);
    for (double d : ws.denominator.values()) EXPECT_LT(d, 0.0);
    const auto f = quotient(p, ws);
    for (double v : f.values()) {
      EXPECT_GE(v, p.discount.rho_min() - 1e-12);
      EXPECT_LE(v, p.discount.rho_max() + 1e-12);
    }
  }
}

TEST(Iterate, HyperbolicCrraMatchesScalarOracle) {
  const Problem p = hyperbolic(UtilityModel::crra(0.5));
  const Grid g(1.0, 201, -6.0, 6.0, 201);
  const auto rho = iterate(p, g);
  const auto& d = p.discount;
  const auto ref = oracle::crra_rate(
      0.5, kMarket.r(), kMarket.theta(), 1.0, [&](double t, double s) { return d.h(t, s); },
      [&](double t, double s) { return d.dh_dt(t, s); }, 1000);
  double err = 0, spread = 0;
  for (std::size_t i = 0; i < g.n_t(); ++i) {
    const auto row = rho.phi.row(i);
    err = std::max(err, std::abs(row[100] - ref.at(g.t(i))));
    spread = std::max(spread, *std::max_element(row.begin(), row.end()) -
                                  *std::min_element(row.begin(), row.end()));
  }
  EXPECT_LT(err, 1e-4);
  EXPECT_LT(spread, 1e-4);
  EXPECT_LE(rho.residual_sup, 1e-8);
  EXPECT_LT(rho.iterations, 10u);
}

TEST(Iterate, MixedPowerDependsOnWealthAndStaysInRange) {
  const Problem p = hyperbolic(UtilityModel::mixed_power(0.5, 0.3, -1.0));
  const Grid g(1.0, 101, -6.0, 6.0, 101);
  const auto rho = iterate(p, g);
  EXPECT_LE(rho.residual_sup, 1e-8);
  double spread = 0;
  for (std::size_t i = 0; i < g.n_t(); ++i) {
    const auto row = rho.phi.row(i);
    spread = std::max(spread, *std::max_element(row.begin(), row.end()) -
                                  *std::min_element(row.begin(), row.end()));
    for (double v : row) {
      EXPECT_GE(v, p.discount.rho_min());
      EXPECT_LE(v, p.discount.rho_max());
    }
  }
  EXPECT_GT(spread, 1e-3);
  EXPECT_TRUE(rho.kappa_respected);
  EXPECT_LE(rho.max_abs_phi_y, rho.kappa);
}

TEST(Iterate, ResidualsDecreaseGeometrically) {
  const Problem p = hyperbolic(UtilityModel::crra(0.5));
  const Grid g(1.0, 51, -6.0, 6.0, 51);
  const auto rho = iterate(p, g);
  ASSERT_GE(rho.residual_history.size(), 3u);
  EXPECT_TRUE(rho.monotone_residuals);
  for (std::size_t k = 1; k < rho.residual_history.size(); ++k)
    EXPECT_LT(rho.residual_history[k], 0.5 * rho.residual_history[k - 1]);
}

TEST(Iterate, BudgetExhaustionReportsHistory) {
  const Problem p = hyperbolic(UtilityModel::crra(0.5));
  const Grid g(1.0, 21, -6.0, 6.0, 21);
  FixedPointOptions o;
  o.max_iter = 2;
  o.tol = 1e-14;
  try {
    iterate(p, g, o);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_EQ(e.residual_history().size(), 3u);
  }
}

TEST(Kappa, DefaultIsAtLeastTheRateNorm) {
  const Problem p = hyperbolic(UtilityModel::mixed_power(0.5, 0.3, -1.0));
  const Grid g(1.0, 21, -6.0, 6.0, 21);
  EXPECT_GE(kappa_default(p, g), p.discount.rho_norm());
}
