#pragma once

#include <optional>

#include "tcmerton/fixed_point.hpp"
#include "tcmerton/grid.hpp"
#include "tcmerton/model.hpp"
#include "tcmerton/strategy.hpp"

namespace tcm {

/// Grid on [0,T] x [y* - half_width, y* + half_width] with y* = log U'(x0).
Grid default_grid(const Problem& problem, std::size_t n_t, std::size_t n_y, double x0,
                  double half_width = 8.0);

struct Timings {
  double fixed_point = 0.0;
  double pbar = 0.0;
  double value = 0.0;
};

/// Everything the solve stage produces: rho_bar, p_bar, the controls and G.
struct Solution {
  Problem problem;
  Grid grid;
  RhoField rho;
  PBarField pbar;
  StrategySurface controls;
  ValueSurface value;
  PBarInterpolator interp;
  Timings timings;
};

/// Runs the fixed point, p_bar and value stages in order.
Solution solve(const Problem& problem, const Grid& grid, const FixedPointOptions& options = {});

/// Rebuilds a Solution from a stored rho_bar field (no iteration).
Solution solve_from_rho(const Problem& problem, RhoField rho, const PdeOptions& pde = {});

}  // namespace tcm
