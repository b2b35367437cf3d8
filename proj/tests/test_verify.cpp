#include <gtest/gtest.h>

#include <cmath>

#include "json.hpp"
#include "tcmerton/errors.hpp"
#include "tcmerton/pipeline.hpp"
#include "tcmerton/verify.hpp"

using namespace tcm;

namespace {

const MarketModel kMarket(0.03, 0.09, 0.2, 1.0);

}  // namespace

TEST(MertonOracle, ClosedFormAgreesWithRk4) {
  for (double gamma : {0.5, 0.3, -1.0, -3.0}) {
    for (double rho0 : {0.02, 0.1, 0.5}) {
      const MertonOracle o(kMarket, gamma, rho0);
      for (double t : {0.0, 0.25, 0.5, 0.99, 1.0}) {
        EXPECT_NEAR(o.annuity(t), o.annuity_rk4(t), 1e-10) << gamma << " " << rho0 << " " << t;
        EXPECT_GT(o.annuity(t), 0.0);
      }
      EXPECT_NEAR(o.consumption(1.0), 1.0, 1e-13);
    }
  }
}

TEST(MertonOracle, DegenerateNuGivesLinearAnnuity) {
  // nu = 0 when rho0 = gamma r + gamma theta^2 / (2 (1 - gamma))
  const double gamma = 0.5, th = kMarket.theta();
  const double rho0 = gamma * kMarket.r() + gamma * th * th / (2 * (1 - gamma));
  const MertonOracle o(kMarket, gamma, rho0);
  EXPECT_NEAR(o.nu(), 0.0, 1e-15);
  EXPECT_NEAR(o.annuity(0.25), 1.75, 1e-12);
  EXPECT_NEAR(o.annuity_rk4(0.25), 1.75, 1e-12);
}

TEST(MertonOracle, PortfolioForHighRiskAversion) {
  const MertonOracle o(kMarket, -1.0, 0.1);
  EXPECT_DOUBLE_EQ(o.pi(), kMarket.theta() / (2 * kMarket.sigma()));
}

TEST(Report, OrderedUniqueAndSerialized) {
  VerificationReport r;
  r.add({"b.second", Status::kWarn, 1.0, 2.0, 0.1, "x"});
  r.add({"a.first", Status::kPass, 0.5, 1.0, 0.2, "y"});
  EXPECT_THROW(r.add({"a.first", Status::kPass, 0, 0, 0, ""}), IntegrityError);
  ASSERT_EQ(r.entries().size(), 2u);
  EXPECT_EQ(r.entries()[0].name, "a.first");
  EXPECT_TRUE(r.ok(false));
  EXPECT_FALSE(r.ok(true));
  r.add({"c.third", Status::kFail, NAN, 0, 0, ""});
  EXPECT_FALSE(r.ok(false));
  const auto j = nlohmann::json::parse(r.to_json());
  EXPECT_EQ(j["summary"]["fail"], 1);
  EXPECT_EQ(j["checks"][1]["status"], "warn");
  EXPECT_TRUE(j["checks"][2]["measured"].is_null());
  EXPECT_NE(r.to_table().find("c.third"), std::string::npos);
}

class SmallMerton : public ::testing::Test {
 protected:
  static const Solution& sol() {
    static const Solution s = solve(
        Problem(kMarket, DiscountModel::exponential(0.1, 1.0), UtilityModel::crra(0.5)),
        Grid(1.0, 101, -6.0, 6.0, 101));
    return s;
  }
};

TEST_F(SmallMerton, AlgebraicChecksPass) {
  EXPECT_EQ(check_first_order_conditions(sol()).status, Status::kPass);
  EXPECT_EQ(check_terminal_value(sol()).status, Status::kPass);
  for (const auto& e : check_bounds_suite(sol()))
    if (e.status != Status::kInfo) EXPECT_EQ(e.status, Status::kPass) << e.name << " " << e.detail;
}

TEST_F(SmallMerton, ReductionWithinTolerance) {
  const MertonOracle o(kMarket, 0.5, 0.1);
  for (const auto& e : check_merton_reduction(sol(), o, {0.5, 1.0, 2.0}))
    EXPECT_EQ(e.status, Status::kPass) << e.name << " " << e.measured;
}

TEST_F(SmallMerton, ResidualShrinksUnderRefinement) {
  const auto coarse = solve(sol().problem, Grid(1.0, 51, -6.0, 6.0, 51));
  const auto fine = hjb_residual(sol());
  const auto c = hjb_residual(coarse);
  EXPECT_GT(c.normalized, 3.0 * fine.normalized);
  EXPECT_GT(fine.last_row_abs, fine.max_abs);
}

TEST_F(SmallMerton, LiteralR1PortfolioBoundIsInformational) {
  for (const auto& e : check_bounds_suite(sol()))
    if (e.name == "bounds.pi_lower_r1") EXPECT_EQ(e.status, Status::kInfo);
}

TEST(BoundsSuite, MixedPowerViolatesOnlyTheInformationalBound) {
  const Problem p(kMarket, DiscountModel::hyperbolic(1.0, 2.0, 1.0),
                  UtilityModel::mixed_power(0.5, 0.3, -1.0));
  const auto s = solve(p, Grid(1.0, 101, -6.0, 6.0, 101));
  for (const auto& e : check_bounds_suite(s)) {
    if (e.name == "bounds.pi_lower_r1")
      EXPECT_LT(e.measured, 0.0);
    else
      EXPECT_EQ(e.status, Status::kPass) << e.name << " " << e.detail;
  }
}

TEST(Probes, InsideTheGrid) {
  const Grid g(1.0, 101, -6.0, 6.0, 101);
  for (const auto& pr : default_probes(g)) {
    EXPECT_NO_THROW(g.t_index(pr.t));
    EXPECT_TRUE(g.contains_y(pr.y));
  }
}
