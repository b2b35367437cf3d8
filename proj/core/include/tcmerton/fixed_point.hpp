#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcmerton/grid.hpp"
#include "tcmerton/model.hpp"
#include "tcmerton/pde.hpp"

namespace tcm {

/// Called once per (s_j, t_i) pair with t_i <= s_j, rows of delta(t_i, s_j, .)
/// and its y-derivative. Rows are visited for each j in decreasing i.
using DeltaVisitor = std::function<void(std::size_t j, std::size_t i, std::span<const double> delta,
                                        std::span<const double> delta_y)>;

/// Solves delta_t + (theta^2/2) delta_yy + (phi - r - theta^2/2) delta_y = 0,
/// delta(s_j, s_j, y) = U0(y) for every terminal node s_j of the grid. At
/// t_i = s_j the exact derivative U0'(y) is passed instead of a difference.
void solve_delta_family(const Problem& problem, const ScalarField2D& phi, const PdeOptions& pde,
                        const DeltaVisitor& visit);

/// Quadrature weight of node s_j in the integral over [t_i, T] plus the
/// terminal point mass at s = T.
double operator_weight(const Grid& grid, std::size_t i, std::size_t j);

/// Reductions over s of the delta family, O(N_t N_y) memory.
struct OperatorWorkspace {
  /// sum_j w_ij dh/dt(t_i, s_j) delta_y(t_i, s_j, y)
  ScalarField2D numerator;
  /// sum_j w_ij h(t_i, s_j) delta_y(t_i, s_j, y); negative everywhere.
  ScalarField2D denominator;
  /// sum_j w_ij h(t_i, s_j) delta(t_i, s_j, y), i.e. G in y-coordinates.
  std::optional<ScalarField2D> value;
  /// sum_j w_ij dh/dt(t_i, s_j) delta(t_i, s_j, y)
  std::optional<ScalarField2D> value_dh;
};

/// Throws IntegrityError if delta_y >= 0 at some node (the sign the operator
/// relies on), naming the node.
OperatorWorkspace build_workspace(const Problem& problem, const ScalarField2D& phi,
                                  const PdeOptions& pde, bool with_value);

/// F[phi] on the grid. Throws IntegrityError if the denominator is not
/// strictly negative or the quotient leaves [min rho_h, max rho_h].
ScalarField2D apply_F(const Problem& problem, const ScalarField2D& phi, const PdeOptions& pde = {});
ScalarField2D quotient(const Problem& problem, const OperatorWorkspace& ws);

/// max(||rho||, 2 C0) with C0 = 2 max |d/dy F[0]|.
double kappa_default(const Problem& problem, const Grid& grid, const PdeOptions& pde = {});
double kappa_from_F0(const DiscountModel& discount, const ScalarField2D& f0);

struct IterationRecord {
  std::size_t iteration;
  double residual;
  double sup_diff;
  double sup_diff_y;
  double damping;
  double seconds;
};

struct FixedPointOptions {
  double tol = 1e-8;
  std::size_t max_iter = 50;
  double damping = 1.0;
  /// Halve the damping whenever the residual increases.
  bool auto_halve = true;
  double min_damping = 1.0 / 64.0;
  /// Defaults to kappa_from_F0 on the first application.
  std::optional<double> kappa;
  PdeOptions pde;
  std::function<void(const IterationRecord&)> on_iteration;
  std::function<void(const std::string&)> on_warning;
};

struct RhoField {
  ScalarField2D phi;
  double residual_sup = 0.0;
  /// Number of updates phi_n -> phi_{n+1} performed.
  std::size_t iterations = 0;
  std::vector<double> residual_history;
  double kappa = 0.0;
  double damping = 1.0;
  double max_abs_phi_y = 0.0;
  bool kappa_respected = true;
  /// True if the residual never increased after the first iteration.
  bool monotone_residuals = true;
};

/// Picard iteration from phi_0 = 0 until sup|F - phi| + sup|d/dy (F - phi)| <= tol.
/// Returns F[phi_n] for the converged iterate. Throws ConvergenceError with the
/// residual history after max_iter updates.
RhoField iterate(const Problem& problem, const Grid& grid, const FixedPointOptions& options = {});

}  // namespace tcm
