#include "tcmerton/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcmerton/errors.hpp"

namespace tcm {

PBarField compute_pbar(const Problem& problem, const ScalarField2D& rho_bar, const PdeOptions& pde) {
  const Grid& grid = rho_bar.grid();
  const std::size_t ny = grid.n_y();
  const double theta = problem.market.theta();
  const double r = problem.market.r();
  rho_bar.require_finite("rho_bar");

  ScalarField2D drift(grid);
  for (std::size_t k = 0; k < drift.values().size(); ++k)
    drift.values()[k] = 0.5 * theta * theta + rho_bar.values()[k] - r;
  const ScalarField2D reaction(grid, -r);

  std::vector<double> i0(ny);
  std::vector<double> i0p(ny);
  for (std::size_t k = 0; k < ny; ++k) {
    i0[k] = problem.utility.I0(grid.y(k));
    i0p[k] = problem.utility.I0p(grid.y(k));
  }

  const BackwardSolver solver(grid, 0.5 * theta * theta, drift, &reaction,
                              boundary_ratios(i0, pde.boundary), pde);
  PBarField out{ScalarField2D(grid), ScalarField2D(grid)};
  solver.march(
      grid.n_t() - 1, i0, [&](std::size_t) { return std::span<const double>(i0); },
      [&](std::size_t i, std::span<const double> row) {
        std::copy(row.begin(), row.end(), out.pbar.row(i).begin());
      });
  out.pbar.require_finite("p_bar");
  // Differentiate log p_bar, which is close to linear in y, then rescale.
  std::vector<double> log_row(ny);
  for (std::size_t i = 0; i + 1 < grid.n_t(); ++i) {
    const auto row = out.pbar.row(i);
    for (std::size_t k = 0; k < ny; ++k) {
      if (!(row[k] > 0.0)) {
        std::ostringstream os;
        os << "p_bar = " << row[k] << " at (t=" << grid.t(i) << ", y=" << grid.y(k)
           << "); p_bar must be positive";
        throw IntegrityError(os.str());
      }
      log_row[k] = std::log(row[k]);
    }
    auto dst = out.pbar_y.row(i);
    d_dy_row(log_row, grid.dy(), dst);
    for (std::size_t k = 0; k < ny; ++k) dst[k] *= row[k];
  }
  std::copy(i0p.begin(), i0p.end(), out.pbar_y.row(grid.n_t() - 1).begin());

  for (std::size_t i = 0; i < grid.n_t(); ++i)
    for (std::size_t k = 0; k < ny; ++k) {
      if (!(out.pbar(i, k) > 0.0) || !(out.pbar_y(i, k) < 0.0)) {
        std::ostringstream os;
        os << "p_bar = " << out.pbar(i, k) << ", p_bar_y = " << out.pbar_y(i, k)
           << " at (t=" << grid.t(i) << ", y=" << grid.y(k)
           << "); p_bar must be positive and strictly decreasing";
        throw IntegrityError(os.str());
      }
    }
  return out;
}

StrategySurface controls_from_pbar(const Problem& problem, const PBarField& pb) {
  const Grid& grid = pb.pbar.grid();
  const double ratio = problem.market.theta() / problem.market.sigma();
  StrategySurface s{ScalarField2D(grid), ScalarField2D(grid)};
  std::vector<double> i0(grid.n_y());
  for (std::size_t k = 0; k < grid.n_y(); ++k) i0[k] = problem.utility.I0(grid.y(k));
  for (std::size_t i = 0; i < grid.n_t(); ++i)
    for (std::size_t k = 0; k < grid.n_y(); ++k) {
      s.pi_star(i, k) = -ratio * pb.pbar_y(i, k) / pb.pbar(i, k);
      s.c_star(i, k) = i0[k] / pb.pbar(i, k);
    }
  return s;
}

namespace {

// int_0^tau e^{q u} du + e^{q tau}
double discounted_mass(double q, double tau) {
  const double integral = std::abs(q * tau) < 1e-8 ? tau * (1.0 + 0.5 * q * tau) : std::expm1(q * tau) / q;
  return integral + std::exp(q * tau);
}

double drift_term(const Problem& p) {
  const double theta = p.market.theta();
  return (p.market.r() + 0.5 * theta * theta + p.discount.rho_norm()) / p.utility.r1();
}

}  // namespace

double normal_tail_lower(double x) { return 0.25 * std::exp(-2.0 * x * x); }

double ratio_bound_lower(const Problem& problem, double t) {
  const double theta = problem.market.theta();
  const double r1 = problem.utility.r1();
  const double a = drift_term(problem) + 1.5 * theta * theta / (r1 * r1);
  const double tau = std::max(0.0, problem.horizon() - t);
  return 0.5 * discounted_mass(-(problem.market.r() + a), tau);
}

double ratio_bound_upper(const Problem& problem, double t) {
  const double theta = problem.market.theta();
  const double r1 = problem.utility.r1();
  const double b = drift_term(problem) + 0.5 * theta * theta / (r1 * r1);
  const double tau = std::max(0.0, problem.horizon() - t);
  return 2.0 * discounted_mass(b - problem.market.r(), tau);
}

PBarInterpolator::PBarInterpolator(const Problem& problem, const PBarField& pb)
    : grid_(pb.pbar.grid()),
      log_p_(pb.pbar.values().size()),
      slope_(pb.pbar.values().size()),
      log_i0_(grid_.n_y()),
      log_i0_slope_(grid_.n_y()) {
  const auto p = pb.pbar.values();
  const auto py = pb.pbar_y.values();
  for (std::size_t k = 0; k < p.size(); ++k) {
    log_p_[k] = std::log(p[k]);
    slope_[k] = py[k] / p[k];
  }
  for (std::size_t k = 0; k < grid_.n_y(); ++k) {
    const double y = grid_.y(k);
    log_i0_[k] = problem.utility.log_I0(y);
    log_i0_slope_[k] = -1.0 / problem.utility.risk_aversion(std::exp(log_i0_[k]));
  }
}

void PBarInterpolator::slice_into(double t, Slice& out) const {
  const double eps = 1e-9 * grid_.dt();
  if (t < -eps || t > grid_.horizon() + eps) {
    std::ostringstream os;
    os << "t=" << t << " outside [0," << grid_.horizon() << "]";
    throw RangeError(os.str());
  }
  const std::size_t ny = grid_.n_y();
  const Cell c = locate(t, 0.0, grid_.dt(), grid_.n_t());
  out.t = t;
  out.log_p.resize(ny);
  out.slope.resize(ny);
  const double* p0 = log_p_.data() + c.k * ny;
  const double* p1 = p0 + ny;
  const double* s0 = slope_.data() + c.k * ny;
  const double* s1 = s0 + ny;
  const double w = c.s;
  for (std::size_t k = 0; k < ny; ++k) {
    out.log_p[k] = p0[k] + w * (p1[k] - p0[k]);
    out.slope[k] = s0[k] + w * (s1[k] - s0[k]);
  }
}

PBarInterpolator::Slice PBarInterpolator::slice(double t) const {
  Slice s;
  slice_into(t, s);
  return s;
}

double PBarInterpolator::log_pbar(const Slice& s, double y) const {
  return hermite(locate(y, grid_.y_min(), grid_.dy(), grid_.n_y()), s.log_p, s.slope, grid_.dy());
}

double PBarInterpolator::log_slope(const Slice& s, double y) const {
  return hermite_slope(locate(y, grid_.y_min(), grid_.dy(), grid_.n_y()), s.log_p, s.slope,
                       grid_.dy());
}

double PBarInterpolator::log_I0(double y) const {
  return hermite(locate(y, grid_.y_min(), grid_.dy(), grid_.n_y()), log_i0_, log_i0_slope_,
                 grid_.dy());
}

double PBarInterpolator::invert(const Slice& s, double x, double tol) const {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << "wealth x=" << x << " must be positive and finite";
    throw RangeError(os.str());
  }
  return invert_log(s, std::log(x), tol);
}

double PBarInterpolator::invert_log(const Slice& s, double lx, double tol) const {
  const auto& lp = s.log_p;
  const std::size_t n = lp.size();
  if (!(lx <= lp.front() + tol) || !(lx >= lp.back() - tol)) {
    std::ostringstream os;
    os << "wealth x=" << std::exp(lx) << " at t=" << s.t << " is outside the covered range ["
       << std::exp(lp.back()) << ", " << std::exp(lp.front())
       << "]; widen [y_min, y_max] of the grid";
    throw RangeError(os.str());
  }
  // lp is decreasing: find k with lp[k] >= lx >= lp[k+1].
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (lp[mid] >= lx)
      lo = mid;
    else
      hi = mid;
  }
  const double dy = grid_.dy();
  const double y0 = grid_.y(lo);
  if (std::abs(lp[lo] - lx) <= tol) return y0;
  if (std::abs(lp[lo + 1] - lx) <= tol) return grid_.y(lo + 1);

  double a = 0.0, b = 1.0;
  double u = (lp[lo] - lx) / (lp[lo] - lp[lo + 1]);
  for (int it = 0; it < 100; ++it) {
    const Cell c{lo, u};
    const double f = hermite(c, lp, s.slope, dy) - lx;
    if (std::abs(f) <= tol) return y0 + u * dy;
    if (f > 0.0)
      a = u;
    else
      b = u;
    const double df = hermite_slope(c, lp, s.slope, dy) * dy;
    double next = df < 0.0 ? u - f / df : 0.5 * (a + b);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    u = next;
    if (b - a < 1e-15) break;
  }
  return y0 + u * dy;
}

double invert_pbar(const PBarInterpolator& interp, double t, double x) {
  return interp.invert(interp.slice(t), x);
}

double marginal_value(const PBarInterpolator& interp, double t, double x) {
  return std::exp(invert_pbar(interp, t, x));
}

ValueSurface value_surface(const OperatorWorkspace& ws) {
  if (!ws.value || !ws.value_dh)
    throw ValidationError("workspace", "value sums were not accumulated");
  return {*ws.value, d_dy(*ws.value), *ws.value_dh};
}

double value_at(const ValueSurface& vs, const PBarInterpolator& interp, std::size_t i, double x) {
  const Grid& g = vs.g.grid();
  const double y = interp.invert(interp.slice(g.t(i)), x);
  return hermite(locate(y, g.y_min(), g.dy(), g.n_y()), vs.g.row(i), vs.g_y.row(i), g.dy());
}

std::vector<ValueRow> value_function(const ValueSurface& vs, const PBarInterpolator& interp,
                                     std::span<const std::size_t> t_indices,
                                     std::span<const double> wealth) {
  const Grid& g = vs.g.grid();
  std::vector<ValueRow> rows;
  rows.reserve(t_indices.size() * wealth.size());
  PBarInterpolator::Slice s;
  for (std::size_t i : t_indices) {
    interp.slice_into(g.t(i), s);
    for (double x : wealth) {
      const double y = interp.invert(s, x);
      const double gv =
          hermite(locate(y, g.y_min(), g.dy(), g.n_y()), vs.g.row(i), vs.g_y.row(i), g.dy());
      rows.push_back({g.t(i), x, y, gv, std::exp(y)});
    }
  }
  return rows;
}

}  // namespace tcm
