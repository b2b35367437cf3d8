#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>

#include "support/oracles.hpp"
#include "tcmerton/errors.hpp"
#include "tcmerton/pipeline.hpp"
#include "tcmerton/verify.hpp"

using namespace tcm;

namespace {

const MarketModel kMarket(0.03, 0.09, 0.2, 1.0);

const Solution& merton() {
  static const Solution s = solve(
      Problem(kMarket, DiscountModel::exponential(0.1, 1.0), UtilityModel::crra(0.5)),
      Grid(1.0, 201, -6.0, 6.0, 201));
  return s;
}

}  // namespace

TEST(PBar, MertonClosedForm) {
  const auto& s = merton();
  const MertonOracle o(kMarket, 0.5, 0.1);
  double ep = 0, epi = 0;
  for (std::size_t i = 0; i < s.grid.n_t(); ++i)
    for (std::size_t k = 0; k < s.grid.n_y(); ++k) {
      ep = std::max(ep, std::abs(s.pbar.pbar(i, k) / o.pbar(s.grid.t(i), s.grid.y(k)) - 1));
      epi = std::max(epi, std::abs(s.controls.pi_star(i, k) / o.pi() - 1));
    }
  EXPECT_LT(ep, 1e-5);
  EXPECT_LT(epi, 1e-4);
}

TEST(PBar, TerminalConsumptionIsAllWealth) {
  const auto& s = merton();
  const std::size_t last = s.grid.n_t() - 1;
  for (std::size_t k = 0; k < s.grid.n_y(); ++k) EXPECT_NEAR(s.controls.c_star(last, k), 1.0, 1e-14);
}

namespace {

double hyperbolic_crra_pbar_error(std::size_t n) {
  const Problem p(kMarket, DiscountModel::hyperbolic(1.0, 2.0, 1.0), UtilityModel::crra(0.5));
  const Grid g(1.0, n, -6.0, 6.0, n);
  const auto s = solve(p, g);
  const auto& d = p.discount;
  const auto rate = oracle::crra_rate(
      0.5, kMarket.r(), kMarket.theta(), 1.0, [&](double t, double u) { return d.h(t, u); },
      [&](double t, double u) { return d.dh_dt(t, u); }, 2000);
  double err = 0;
  for (double t : {0.0, 0.3, 0.6, 0.9}) {
    const std::size_t i = g.t_index(t);
    const double a = oracle::crra_annuity(0.5, kMarket.r(), kMarket.theta(), 1.0,
                                          [&](double u) { return rate.at(u); }, t);
    for (std::size_t k = n / 4; k <= 3 * n / 4; ++k)
      err = std::max(err, std::abs(s.pbar.pbar(i, k) / (a * std::exp(-2 * g.y(k))) - 1));
  }
  return err;
}

}  // namespace

TEST(PBar, HyperbolicCrraMatchesAnnuityOracle) {
  const double coarse = hyperbolic_crra_pbar_error(101);
  const double fine = hyperbolic_crra_pbar_error(201);
  std::printf("p_bar error vs annuity oracle: n=101 %.3e, n=201 %.3e\n", coarse, fine);
  EXPECT_LT(fine, 5e-4);
  EXPECT_GT(coarse / fine, 3.0);
}

TEST(RatioBounds, TerminalValuesAndQuadrature) {
  const Problem p(kMarket, DiscountModel::hyperbolic(1.0, 2.0, 1.0),
                  UtilityModel::mixed_power(0.5, 0.3, -1.0));
  EXPECT_DOUBLE_EQ(ratio_bound_lower(p, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(ratio_bound_upper(p, 1.0), 2.0);
  const double th = kMarket.theta(), r = kMarket.r(), r1 = 0.7;
  const double base = (r + th * th / 2 + p.discount.rho_norm()) / r1;
  const double a = base + 1.5 * th * th / (r1 * r1);
  const double b = base + 0.5 * th * th / (r1 * r1);
  for (double t : {0.0, 0.4, 0.9}) {
    const double tau = 1.0 - t;
    const double lo =
        0.5 * (oracle::simpson([&](double u) { return std::exp(-(r + a) * u); }, 0, tau) +
               std::exp(-(r + a) * tau));
    const double hi =
        2.0 * (oracle::simpson([&](double u) { return std::exp((b - r) * u); }, 0, tau) +
               std::exp((b - r) * tau));
    EXPECT_NEAR(ratio_bound_lower(p, t), lo, 1e-10);
    EXPECT_NEAR(ratio_bound_upper(p, t), hi, 1e-10 * hi);
  }
}

TEST(RatioBounds, GaussianMomentInequalities) {
  // E[e^{-k|Z|}] = 2 e^{k^2/2} N(-k) and E[e^{k|Z|}] = 2 e^{k^2/2} N(k)
  for (double k = 0.0; k <= 4.0; k += 0.05) {
    const double lower = 2 * std::exp(k * k / 2) * oracle::normal_cdf(-k);
    const double upper = 2 * std::exp(k * k / 2) * oracle::normal_cdf(k);
    EXPECT_GE(lower, 0.5 * std::exp(-1.5 * k * k) - 1e-15) << k;
    EXPECT_LE(upper, 2 * std::exp(k * k / 2) + 1e-15) << k;
  }
}

TEST(RatioBounds, NormalTailLowerBoundHolds) {
  for (double x = 0.0; x <= 6.0; x += 0.01)
    EXPECT_LE(normal_tail_lower(x), oracle::normal_cdf(-x) * (1 + 1e-12)) << x;
}

TEST(Interpolator, InversionRoundTrip) {
  const auto& s = merton();
  for (double t : {0.0, 0.37, 0.8, 1.0}) {
    const auto slice = s.interp.slice(t);
    for (double y : {-4.0, -1.23, 0.0, 0.5, 3.9}) {
      const double x = std::exp(s.interp.log_pbar(slice, y));
      EXPECT_NEAR(s.interp.invert(slice, x), y, 1e-9);
    }
  }
  // at a node, p_bar reproduces the stored value
  const auto slice = s.interp.slice(s.grid.t(40));
  EXPECT_NEAR(std::exp(s.interp.log_pbar(slice, s.grid.y(77))), s.pbar.pbar(40, 77),
              1e-12 * s.pbar.pbar(40, 77));
}

TEST(Interpolator, OutOfRangeWealthThrows) {
  const auto& s = merton();
  const auto slice = s.interp.slice(0.0);
  EXPECT_THROW(s.interp.invert(slice, 1e9), RangeError);
  EXPECT_THROW(s.interp.invert(slice, 1e-12), RangeError);
  EXPECT_THROW(s.interp.invert(slice, -1.0), RangeError);
  EXPECT_THROW(s.interp.slice(1.5), RangeError);
}

TEST(Value, TerminalSliceAndMarginal) {
  const auto& s = merton();
  const auto& u = s.problem.utility;
  const std::size_t last = s.grid.n_t() - 1;
  for (double x : {0.3, 1.0, 2.5}) {
    EXPECT_NEAR(value_at(s.value, s.interp, last, x), u.U(x), 1e-7);
    EXPECT_NEAR(marginal_value(s.interp, 1.0, x) / u.Up(x), 1.0, 1e-9);
  }
}

TEST(Value, MertonValueFunction) {
  const auto& s = merton();
  const MertonOracle o(kMarket, 0.5, 0.1);
  const std::size_t idx[] = {0, 100};
  const double wealth[] = {0.5, 1.0, 2.0};
  for (const auto& row : value_function(s.value, s.interp, idx, wealth)) {
    EXPECT_NEAR(row.g / o.value(row.t, row.x), 1.0, 1e-5);
    EXPECT_NEAR(row.v, std::exp(row.y), 0.0);
  }
}
