#include "tcmerton/pipeline.hpp"

#include <chrono>
#include <cmath>

namespace tcm {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Grid default_grid(const Problem& problem, std::size_t n_t, std::size_t n_y, double x0,
                  double half_width) {
  const double y_star = std::log(problem.utility.Up(x0));
  return Grid(problem.horizon(), n_t, y_star - half_width, y_star + half_width, n_y);
}

Solution solve_from_rho(const Problem& problem, RhoField rho, const PdeOptions& pde) {
  using clock = std::chrono::steady_clock;
  Timings timings;
  auto start = clock::now();
  PBarField pb = compute_pbar(problem, rho.phi, pde);
  StrategySurface controls = controls_from_pbar(problem, pb);
  timings.pbar = seconds_since(start);

  start = clock::now();
  ValueSurface value = value_surface(build_workspace(problem, rho.phi, pde, true));
  timings.value = seconds_since(start);

  PBarInterpolator interp(problem, pb);
  const Grid grid = rho.phi.grid();
  return Solution{problem,         grid,           std::move(rho),    std::move(pb),
                  std::move(controls), std::move(value), std::move(interp), timings};
}

Solution solve(const Problem& problem, const Grid& grid, const FixedPointOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  RhoField rho = iterate(problem, grid, options);
  const double fp = seconds_since(start);
  Solution s = solve_from_rho(problem, std::move(rho), options.pde);
  s.timings.fixed_point = fp;
  return s;
}

}  // namespace tcm
