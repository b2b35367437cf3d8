#include <gtest/gtest.h>

#include <cmath>

#include "tcmerton/errors.hpp"
#include "tcmerton/pde.hpp"

using namespace tcm;

namespace {

struct Coeffs {
  double D = 0.045;
  double b = 0.6;
  double c = -0.03;
};

// u_t + D u_yy + b u_y + c u = 0 with Gaussian terminal data: the solution
// stays Gaussian, centred at -b tau, with variance s^2 + 2 D tau.
double gaussian_exact(const Coeffs& k, double s2, double tau, double y) {
  const double v = s2 + 2 * k.D * tau;
  return std::sqrt(s2 / v) * std::exp(-(y + k.b * tau) * (y + k.b * tau) / (2 * v) + k.c * tau);
}

double gaussian_error(std::size_t nt, std::size_t ny, bool richardson) {
  const Coeffs k;
  const double s2 = 0.3;
  const Grid g(1.0, nt, -5.0, 5.0, ny);
  PdeOptions o;
  o.richardson = richardson;
  std::vector<double> term(ny);
  for (std::size_t j = 0; j < ny; ++j) term[j] = gaussian_exact(k, s2, 0.0, g.y(j));
  const auto u = solve_backward(
      g, k.D, [&](double, double) { return k.b; }, [&](double, double) { return k.c; },
      [](double, double) { return 0.0; },
      [&](double y) { return gaussian_exact(k, s2, 0.0, y); }, o);
  double e = 0;
  for (std::size_t j = 0; j < ny; ++j)
    e = std::max(e, std::abs(u(0, j) - gaussian_exact(k, s2, 1.0, g.y(j))));
  return e;
}

}  // namespace

TEST(BackwardSolver, ExponentialDataIsReproducedUpToTimeError) {
  // e^{ky} is an eigenfunction of the discrete operator and the boundary
  // rule is exact on it, so only the time discretization remains.
  const Coeffs c;
  const double kk = -2.0;
  auto err = [&](std::size_t nt) {
    const Grid g(1.0, nt, -4.0, 4.0, 81);
    PdeOptions o;
    o.richardson = false;
    const auto u = solve_backward(
        g, c.D, [&](double, double) { return c.b; }, [&](double, double) { return c.c; },
        [](double, double) { return 0.0; }, [&](double y) { return std::exp(kk * y); }, o);
    double e = 0;
    for (std::size_t j = 0; j < 81; ++j) {
      // the discrete symbol of the spatial operator on e^{ky}
      const double dy = g.dy();
      const double sym = c.D * (2 * std::cosh(kk * dy) - 2) / (dy * dy) +
                         c.b * std::sinh(kk * dy) / dy + c.c;
      e = std::max(e, std::abs(u(0, j) / std::exp(kk * g.y(j) + sym) - 1));
    }
    return e;
  };
  const double e1 = err(41), e2 = err(81);
  EXPECT_LT(e2, 1e-4);
  EXPECT_GT(e1 / e2, 3.0);
}

TEST(BackwardSolver, SecondOrderInSpaceWithoutExtrapolation) {
  const double e1 = gaussian_error(801, 101, false);
  const double e2 = gaussian_error(801, 201, false);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.6);
}

TEST(BackwardSolver, ExtrapolationBeatsSecondOrder) {
  const double plain = gaussian_error(801, 201, false);
  const double extrapolated = gaussian_error(801, 201, true);
  EXPECT_LT(extrapolated, 0.1 * plain);
}

TEST(BackwardSolver, ConvergesOnTheReferenceGrid) {
  EXPECT_LT(gaussian_error(401, 401, true), 1e-5);
}

TEST(BackwardSolver, SourceTermMatchesDuhamel) {
  // u_t + D u_yy + c u + 1 = 0, u(T) = 0, flat data: u = (1 - e^{c tau}) / (-c)
  const Grid g(1.0, 201, -1.0, 1.0, 21);
  const double c = -0.3;
  const auto u = solve_backward(
      g, 0.1, [](double, double) { return 0.0; }, [&](double, double) { return c; },
      [](double, double) { return 1.0; }, [](double) { return 0.0; });
  EXPECT_NEAR(u(0, 10), (1 - std::exp(c)) / (-c), 1e-5);
}

TEST(BackwardSolver, NonDominantSystemIsRejected) {
  const Grid g(1.0, 11, 0.0, 1.0, 11);
  const ScalarField2D drift(g, 50.0);
  PdeOptions o;
  o.richardson = false;
  EXPECT_THROW(BackwardSolver(g, 1e-4, drift, nullptr, {1.0, 1.0}, o), SolverError);
}

TEST(BackwardSolver, RichardsonNeedsOddNodeCount) {
  const Grid g(1.0, 11, 0.0, 1.0, 10);
  const ScalarField2D drift(g, 0.1);
  EXPECT_THROW(BackwardSolver(g, 0.1, drift, nullptr, {1.0, 1.0}), ValidationError);
}

TEST(BoundaryRatios, GeometricData) {
  std::vector<double> g(9);
  for (std::size_t k = 0; k < 9; ++k) g[k] = std::exp(-0.5 * static_cast<double>(k));
  const auto [l, r] = boundary_ratios(g, BoundaryRule::kExponentialFromTerminal);
  EXPECT_NEAR(l, std::exp(0.5), 1e-12);
  EXPECT_NEAR(r, std::exp(-0.5), 1e-12);
  const auto [l1, r1] = boundary_ratios(g, BoundaryRule::kLinear);
  EXPECT_EQ(l1, 1.0);
  EXPECT_EQ(r1, 1.0);
  std::vector<double> flat(9, 2.0);
  const auto [l2, r2] = boundary_ratios(flat, BoundaryRule::kExponentialFromTerminal);
  EXPECT_EQ(l2, 1.0);
  EXPECT_EQ(r2, 1.0);
}
