#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "tcmerton/grid.hpp"

namespace tcm {

/// Artificial boundary condition at y_min and y_max.
enum class BoundaryRule {
  /// u_yy = 0: the solution is extrapolated linearly.
  kLinear,
  /// u_yy = k u_y with k read off the terminal data at each end, so the
  /// discrete condition is exact on span{1, e^{k y}}. Reduces to kLinear for
  /// terminal data that is flat or linear near the boundary.
  kExponentialFromTerminal,
};

struct PdeOptions {
  /// Time-weighting of the theta scheme; 0.5 is Crank-Nicolson.
  double theta = 0.5;
  /// Take the first step after the terminal condition with implicit Euler.
  bool implicit_startup = true;
  BoundaryRule boundary = BoundaryRule::kExponentialFromTerminal;
  /// Also solve on the grid with every other y-node and combine the two
  /// solutions to cancel the O(dy^2) error term. Needs odd n_y >= 9.
  bool richardson = true;
};

/// Ratios (E_left, E_right) with u_0 - u_1 = E_left (u_1 - u_2) and
/// u_M - u_{M-1} = E_right (u_{M-1} - u_{M-2}).
std::pair<double, double> boundary_ratios(std::span<const double> terminal, BoundaryRule rule);

/// Backward theta-scheme for u_t + D u_yy + b(t,y) u_y + c(t,y) u + f(t,y) = 0
/// with the tridiagonal factorizations of every step precomputed, so that many
/// solves sharing coefficients (differing in terminal time or data) cost one
/// forward/back substitution per step.
class BackwardSolver {
 public:
  /// `reaction` may be null (c = 0). Throws SolverError naming the first step
  /// whose system is not diagonally dominant or has a degenerate pivot.
  /// With options.richardson a second solver on the half-resolution y-grid is
  /// built and march() returns the extrapolated rows.
  BackwardSolver(const Grid& grid, double diffusion, const ScalarField2D& drift,
                 const ScalarField2D* reaction, std::pair<double, double> ratios,
                 PdeOptions options = {});

  const Grid& grid() const noexcept { return grid_; }

  /// Advance from row n+1 to row n. `startup` selects implicit Euler.
  /// Source rows may be empty (f = 0). `scratch` needs n_y entries.
  void step(std::size_t n, bool startup, std::span<const double> u_next,
            std::span<const double> source_n, std::span<const double> source_next,
            std::span<double> u_out, std::span<double> scratch) const;

  /// Solve from `terminal` placed at row `last` down to row 0. `on_row(i, row)`
  /// is called for row `last` and every row below it, in decreasing order.
  /// `source(i)` returns the source row for time index i (empty for none).
  void march(std::size_t last, std::span<const double> terminal,
             const std::function<std::span<const double>(std::size_t)>& source,
             const std::function<void(std::size_t, std::span<const double>)>& on_row) const;

 private:
  struct Factor {
    std::vector<double> sub;      // a_k
    std::vector<double> cprime;   // c'_k
    std::vector<double> inv_den;  // 1 / (b_k - a_k c'_{k-1})
  };
  Factor factor(std::size_t n, double weight) const;
  void combine(std::span<const double> fine, std::span<const double> coarse,
               std::span<double> out, std::span<double> corr) const;

  Grid grid_;
  double diffusion_;
  PdeOptions options_;
  double e_left_;
  double e_right_;
  // Spatial operator rows: lo/di/up per time row, interior nodes.
  std::vector<double> lo_;
  std::vector<double> di_;
  std::vector<double> up_;
  std::vector<Factor> theta_factors_;
  std::vector<Factor> euler_factors_;
  std::shared_ptr<const BackwardSolver> coarse_;
};

using CoefficientFn = std::function<double(double t, double y)>;

/// One-off solve. Unset drift/reaction/source mean zero.
ScalarField2D solve_backward(const Grid& grid, double diffusion, const CoefficientFn& drift,
                             const CoefficientFn& reaction, const CoefficientFn& source,
                             const std::function<double(double)>& terminal,
                             PdeOptions options = {});

}  // namespace tcm
