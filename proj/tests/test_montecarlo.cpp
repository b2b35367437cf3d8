#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "tcmerton/errors.hpp"
#include "tcmerton/montecarlo.hpp"
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

TEST(Noise, IndependentOfAccessOrder) {
  NoiseSource a(11, 50, 16), b(11, 50, 16);
  std::vector<std::vector<double>> fwd(40, std::vector<double>(50));
  for (std::size_t u = 0; u < 40; ++u) a.draw(u, fwd[u]);
  std::vector<double> z(50);
  for (std::size_t u : {39u, 3u, 17u, 16u, 0u}) {
    b.draw(u, z);
    EXPECT_EQ(z, fwd[u]) << u;
  }
  NoiseSource c(12, 50, 16);
  c.draw(0, z);
  EXPECT_NE(z, fwd[0]);
}

TEST(Noise, StandardNormalMoments) {
  NoiseSource n(5, 1000, 64);
  std::vector<double> z(1000);
  double s = 0, s2 = 0;
  const int rows = 200;
  for (int u = 0; u < rows; ++u) {
    n.draw(static_cast<std::size_t>(u), z);
    for (double v : z) {
      s += v;
      s2 += v * v;
    }
  }
  const double m = s / (rows * 1000.0);
  EXPECT_NEAR(m, 0.0, 4.0 / std::sqrt(rows * 1000.0));
  EXPECT_NEAR(s2 / (rows * 1000.0), 1.0, 0.02);
}

TEST(Summarize, PlainAndAntithetic) {
  const std::vector<double> v = {1, 3, 2, 6};
  const auto plain = summarize(v, false);
  EXPECT_DOUBLE_EQ(plain.mean, 3.0);
  EXPECT_EQ(plain.samples, 4u);
  const double var = ((4.0 + 0 + 1 + 9) / 3.0);
  EXPECT_NEAR(plain.se, std::sqrt(var / 4), 1e-15);
  const auto anti = summarize(v, true);
  EXPECT_DOUBLE_EQ(anti.mean, 3.0);
  EXPECT_EQ(anti.samples, 2u);
  // pair means 2 and 4
  EXPECT_NEAR(anti.se, std::sqrt(2.0 / 2), 1e-15);
}

TEST(StepCount, MustDivideTheInterval) {
  EXPECT_EQ(step_count(0.0, 1.0, 1e-3), 1000u);
  EXPECT_EQ(step_count(0.25, 1.0, 0.25), 3u);
  EXPECT_THROW(step_count(0.0, 1.0, 0.3), ValidationError);
}

TEST(SimulateY, ConstantRateMoments) {
  const auto& s = merton();
  McOptions o;
  o.n_paths = 4000;
  o.dt = 0.01;
  const auto ens = simulate_Y(s.problem, s.rho.phi, 0.0, 0.2, o);
  const double th = kMarket.theta();
  const double drift = 0.1 - kMarket.r() - th * th / 2;
  std::vector<double> yT(o.n_paths);
  for (std::size_t p = 0; p < o.n_paths; ++p) yT[p] = ens.y_path(p).back();
  const auto est = summarize(yT, true);
  EXPECT_NEAR(est.mean, 0.2 + drift, 1e-12);  // antithetic pairs cancel the noise exactly
  double var = 0;
  for (double y : yT) var += (y - est.mean) * (y - est.mean);
  var /= (o.n_paths - 1);
  EXPECT_NEAR(var, th * th, 0.1 * th * th);
}

TEST(SimulateY, LeavingTheGridThrows) {
  const Problem p(kMarket, DiscountModel::exponential(0.1, 1.0), UtilityModel::crra(0.5));
  const auto s = solve(p, Grid(1.0, 21, -0.3, 0.3, 21));
  McOptions o;
  o.n_paths = 200;
  o.dt = 0.01;
  EXPECT_THROW(simulate_Y(p, s.rho.phi, 0.0, 0.0, o), RangeError);
}

TEST(Equilibrium, MertonValueWithinThreeStandardErrors) {
  const auto& s = merton();
  McOptions o;
  o.n_paths = 20000;
  o.dt = 2e-3;
  const auto st = run_equilibrium(s.problem, s.rho.phi, s.interp, 0.0, 1.0, o, false);
  const MertonOracle oracle(kMarket, 0.5, 0.1);
  EXPECT_LT(std::abs(st.J.mean - oracle.value(0.0, 1.0)), 3.0 * st.J.se);
}

TEST(Equilibrium, DeterministicForAGivenSeed) {
  const auto& s = merton();
  McOptions o;
  o.n_paths = 500;
  o.dt = 0.01;
  const auto a = run_equilibrium(s.problem, s.rho.phi, s.interp, 0.0, 1.0, o, true, 3);
  const auto b = run_equilibrium(s.problem, s.rho.phi, s.interp, 0.0, 1.0, o, true, 3);
  EXPECT_EQ(a.J.mean, b.J.mean);
  EXPECT_EQ(a.gaps, b.gaps);
  EXPECT_EQ(a.exported.x, b.exported.x);
  o.seed += 1;
  const auto c = run_equilibrium(s.problem, s.rho.phi, s.interp, 0.0, 1.0, o, false);
  EXPECT_NE(a.J.mean, c.J.mean);
}

TEST(Equilibrium, ExportedPathsMatchStreamedStatistics) {
  const auto& s = merton();
  McOptions o;
  o.n_paths = 64;
  o.dt = 0.01;
  const auto st = run_equilibrium(s.problem, s.rho.phi, s.interp, 0.0, 1.0, o, true, 64);
  ASSERT_TRUE(st.exported.has_wealth());
  for (std::size_t p = 0; p < 64; ++p) {
    EXPECT_EQ(st.exported.x_path(p).front(), 1.0);
    EXPECT_EQ(st.exported.x_path(p).back(), st.terminal_wealth[p]);
  }
}

TEST(Deviation, ZeroLengthDeviationIsExactlyZero) {
  const auto& s = merton();
  McOptions o;
  o.n_paths = 200;
  o.dt = 0.01;
  const auto d = estimate_deviation(s.problem, s.interp, 0.0, 1.0, Deviation{0.0, 0.1, 0.2}, o);
  EXPECT_EQ(d.mean, 0.0);
  EXPECT_EQ(d.se, 0.0);
}

TEST(Deviation, StarvingConsumptionIsWorse) {
  const auto& s = merton();
  McOptions o;
  o.n_paths = 2000;
  o.dt = 0.005;
  const double pi = MertonOracle(kMarket, 0.5, 0.1).pi();
  const auto d = estimate_deviation(s.problem, s.interp, 0.0, 1.0, Deviation{0.2, pi, 0.0}, o);
  EXPECT_GT(d.mean, 3.0 * d.se);
}

TEST(OperatorMc, AgreesWithPdeForConstantRate) {
  const auto& s = merton();
  const auto est = estimate_F_mc(s.problem, s.rho.phi, 40, 0.3, 2000, 9);
  EXPECT_NEAR(est.mean, 0.1, 1e-12);
}
