#include "tcmerton/fixed_point.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "tcmerton/errors.hpp"

namespace tcm {

namespace {

ScalarField2D delta_drift(const Problem& problem, const ScalarField2D& phi) {
  const double shift = problem.market.r() + 0.5 * problem.market.theta() * problem.market.theta();
  ScalarField2D b(phi.grid());
  auto out = b.values();
  auto in = phi.values();
  for (std::size_t k = 0; k < in.size(); ++k) out[k] = in[k] - shift;
  return b;
}

// h and dh/dt on the lattice {(t_i, s_j): i <= j}, row-major in i.
struct DiscountTable {
  std::size_t n;
  std::vector<double> h;
  std::vector<double> dh;
  DiscountTable(const DiscountModel& d, const Grid& grid) : n(grid.n_t()), h(n * n), dh(n * n) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) {
        h[i * n + j] = d.h(grid.t(i), grid.t(j));
        dh[i * n + j] = d.dh_dt(grid.t(i), grid.t(j));
      }
  }
};

}  // namespace

void solve_delta_family(const Problem& problem, const ScalarField2D& phi, const PdeOptions& pde,
                        const DeltaVisitor& visit) {
  const Grid& grid = phi.grid();
  const std::size_t ny = grid.n_y();
  const double theta = problem.market.theta();
  phi.require_finite("phi");

  std::vector<double> terminal(ny);
  std::vector<double> terminal_y(ny);
  for (std::size_t k = 0; k < ny; ++k) {
    terminal[k] = problem.utility.U0(grid.y(k));
    terminal_y[k] = problem.utility.U0p(grid.y(k));
  }
  const ScalarField2D drift = delta_drift(problem, phi);
  const BackwardSolver solver(grid, 0.5 * theta * theta, drift, nullptr,
                              boundary_ratios(terminal, pde.boundary), pde);

  std::vector<double> dy_row(ny);
  for (std::size_t j = 0; j < grid.n_t(); ++j) {
    try {
      solver.march(j, terminal, {}, [&](std::size_t i, std::span<const double> row) {
        if (i == j) {
          visit(j, i, row, terminal_y);
          return;
        }
        d_dy_row(row, grid.dy(), dy_row);
        visit(j, i, row, dy_row);
      });
    } catch (const SolverError& e) {
      std::ostringstream os;
      os << "delta family with terminal time s=" << grid.t(j) << ": " << e.what();
      throw SolverError(e.step(), os.str());
    }
  }
}

double operator_weight(const Grid& grid, std::size_t i, std::size_t j) {
  const std::size_t last = grid.n_t() - 1;
  if (j < i || j > last) return 0.0;
  double w = 0.0;
  if (i < last) w = (j == i || j == last) ? 0.5 * grid.dt() : grid.dt();
  if (j == last) w += 1.0;
  return w;
}

OperatorWorkspace build_workspace(const Problem& problem, const ScalarField2D& phi,
                                  const PdeOptions& pde, bool with_value) {
  const Grid& grid = phi.grid();
  const std::size_t ny = grid.n_y();
  const DiscountTable table(problem.discount, grid);
  OperatorWorkspace ws{ScalarField2D(grid), ScalarField2D(grid), std::nullopt, std::nullopt};
  if (with_value) {
    ws.value.emplace(grid);
    ws.value_dh.emplace(grid);
  }
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t worst_i = 0, worst_j = 0, worst_k = 0;

  solve_delta_family(problem, phi, pde,
                     [&](std::size_t j, std::size_t i, std::span<const double> delta,
                         std::span<const double> delta_y) {
                       const double w = operator_weight(grid, i, j);
                       const double wh = w * table.h[i * table.n + j];
                       const double wdh = w * table.dh[i * table.n + j];
                       auto num = ws.numerator.row(i);
                       auto den = ws.denominator.row(i);
                       for (std::size_t k = 0; k < ny; ++k) {
                         const double dy = delta_y[k];
                         if (dy > worst) {
                           worst = dy;
                           worst_i = i;
                           worst_j = j;
                           worst_k = k;
                         }
                         num[k] += wdh * dy;
                         den[k] += wh * dy;
                       }
                       if (with_value) {
                         auto val = ws.value->row(i);
                         auto vdh = ws.value_dh->row(i);
                         for (std::size_t k = 0; k < ny; ++k) {
                           val[k] += wh * delta[k];
                           vdh[k] += wdh * delta[k];
                         }
                       }
                     });
  if (!(worst < 0.0)) {
    std::ostringstream os;
    os << "delta_y = " << worst << " is not negative at (t=" << grid.t(worst_i)
       << ", s=" << grid.t(worst_j) << ", y=" << grid.y(worst_k) << ")";
    throw IntegrityError(os.str());
  }
  return ws;
}

ScalarField2D quotient(const Problem& problem, const OperatorWorkspace& ws) {
  const Grid& grid = ws.numerator.grid();
  const double lo = problem.discount.rho_min();
  const double hi = problem.discount.rho_max();
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
  ScalarField2D f(grid);
  for (std::size_t i = 0; i < grid.n_t(); ++i)
    for (std::size_t k = 0; k < grid.n_y(); ++k) {
      const double den = ws.denominator(i, k);
      if (!(den < 0.0)) {
        std::ostringstream os;
        os << "operator denominator " << den << " is not negative at (t=" << grid.t(i)
           << ", y=" << grid.y(k) << ")";
        throw IntegrityError(os.str());
      }
      const double v = ws.numerator(i, k) / den;
      if (!(v >= lo - slack && v <= hi + slack)) {
        std::ostringstream os;
        os << "F = " << v << " outside [" << lo << ", " << hi << "] at (t=" << grid.t(i)
           << ", y=" << grid.y(k) << ")";
        throw IntegrityError(os.str());
      }
      f(i, k) = v;
    }
  return f;
}

ScalarField2D apply_F(const Problem& problem, const ScalarField2D& phi, const PdeOptions& pde) {
  const double norm = problem.discount.rho_norm();
  const double slack = 1e-12 * std::max(1.0, norm);
  for (double v : phi.values())
    if (!(std::abs(v) <= norm + slack))
      throw ValidationError("phi", "|phi| exceeds the discount-rate norm");
  return quotient(problem, build_workspace(problem, phi, pde, false));
}

double kappa_from_F0(const DiscountModel& discount, const ScalarField2D& f0) {
  const double c0 = 2.0 * d_dy(f0).max_abs();
  return std::max(discount.rho_norm(), 2.0 * c0);
}

double kappa_default(const Problem& problem, const Grid& grid, const PdeOptions& pde) {
  return kappa_from_F0(problem.discount, apply_F(problem, ScalarField2D(grid), pde));
}

RhoField iterate(const Problem& problem, const Grid& grid, const FixedPointOptions& options) {
  if (!(options.tol > 0.0)) throw ValidationError("solver.tol", "must be > 0");
  if (!(options.damping > 0.0 && options.damping <= 1.0))
    throw ValidationError("solver.damping", "must lie in (0, 1]");
  if (options.max_iter == 0) throw ValidationError("solver.max_iter", "must be >= 1");
  if (std::abs(grid.horizon() - problem.horizon()) > 1e-12 * problem.horizon())
    throw ValidationError("grid.T", "grid horizon differs from the market horizon");

  using clock = std::chrono::steady_clock;
  ScalarField2D phi(grid);
  double damping = options.damping;
  std::vector<double> history;
  std::optional<double> kappa = options.kappa;
  bool monotone = true;

  for (std::size_t n = 0;; ++n) {
    const auto start = clock::now();
    ScalarField2D f = apply_F(problem, phi, options.pde);
    if (!kappa) kappa = kappa_from_F0(problem.discount, f);

    ScalarField2D diff(grid);
    for (std::size_t k = 0; k < diff.values().size(); ++k)
      diff.values()[k] = f.values()[k] - phi.values()[k];
    const double sup_diff = diff.max_abs();
    const double sup_diff_y = d_dy(diff).max_abs();
    const double residual = sup_diff + sup_diff_y;
    if (!history.empty() && n >= 2 && residual > history.back()) monotone = false;
    const bool increased = !history.empty() && residual > history.back();
    history.push_back(residual);
    if (options.on_iteration)
      options.on_iteration({n, residual, sup_diff, sup_diff_y, damping,
                            std::chrono::duration<double>(clock::now() - start).count()});

    if (residual <= options.tol) {
      RhoField out{std::move(f), residual, n, std::move(history), *kappa, damping, 0.0, true,
                   monotone};
      out.max_abs_phi_y = d_dy(out.phi).max_abs();
      out.kappa_respected = out.max_abs_phi_y <= *kappa;
      if (!out.kappa_respected && options.on_warning) {
        std::ostringstream os;
        os << "max |d/dy rho_bar| = " << out.max_abs_phi_y << " exceeds kappa = " << *kappa;
        options.on_warning(os.str());
      }
      return out;
    }
    if (n >= options.max_iter) {
      std::ostringstream os;
      os << "fixed-point iteration did not reach tol=" << options.tol << " after " << n
         << " updates (last residual " << residual << ")";
      throw ConvergenceError(os.str(), history);
    }
    if (increased && options.auto_halve && damping > options.min_damping) {
      damping = std::max(options.min_damping, 0.5 * damping);
      if (options.on_warning) {
        std::ostringstream os;
        os << "residual increased at iteration " << n << "; damping reduced to " << damping;
        options.on_warning(os.str());
      }
    }
    for (std::size_t k = 0; k < phi.values().size(); ++k)
      phi.values()[k] += damping * diff.values()[k];
  }
}

}  // namespace tcm
