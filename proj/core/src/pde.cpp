#include "tcmerton/pde.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "tcmerton/errors.hpp"

namespace tcm {

namespace {

double ratio_or_one(double num, double den) {
  const double scale = std::max(std::abs(num), std::abs(den));
  if (scale == 0.0 || std::abs(den) <= 1e-14 * scale) return 1.0;
  const double e = num / den;
  if (!std::isfinite(e) || e <= 0.0) return 1.0;
  return e;
}

}  // namespace

std::pair<double, double> boundary_ratios(std::span<const double> g, BoundaryRule rule) {
  if (rule == BoundaryRule::kLinear || g.size() < 3) return {1.0, 1.0};
  const std::size_t m = g.size() - 1;
  return {ratio_or_one(g[0] - g[1], g[1] - g[2]), ratio_or_one(g[m] - g[m - 1], g[m - 1] - g[m - 2])};
}

BackwardSolver::BackwardSolver(const Grid& grid, double diffusion, const ScalarField2D& drift,
                               const ScalarField2D* reaction, std::pair<double, double> ratios,
                               PdeOptions options)
    : grid_(grid),
      diffusion_(diffusion),
      options_(options),
      e_left_(ratios.first),
      e_right_(ratios.second) {
  if (!(diffusion > 0.0) || !std::isfinite(diffusion))
    throw ValidationError("pde.diffusion", "must be finite and > 0");
  if (!(options.theta >= 0.5 && options.theta <= 1.0))
    throw ValidationError("pde.theta", "theta must lie in [0.5, 1]");
  if (!(drift.grid() == grid)) throw ValidationError("pde.drift", "grid mismatch");
  if (reaction && !(reaction->grid() == grid))
    throw ValidationError("pde.reaction", "grid mismatch");

  const std::size_t nt = grid.n_t();
  const std::size_t ny = grid.n_y();
  const double dy = grid.dy();
  const double d2 = diffusion / (dy * dy);
  lo_.assign(nt * ny, 0.0);
  di_.assign(nt * ny, 0.0);
  up_.assign(nt * ny, 0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t k = 1; k + 1 < ny; ++k) {
      const double b = drift(i, k);
      const double c = reaction ? (*reaction)(i, k) : 0.0;
      if (!std::isfinite(b) || !std::isfinite(c)) {
        std::ostringstream os;
        os << "non-finite coefficient at (t=" << grid.t(i) << ", y=" << grid.y(k) << ")";
        throw SolverError(i, os.str());
      }
      lo_[i * ny + k] = d2 - b / (2.0 * dy);
      di_[i * ny + k] = -2.0 * d2 + c;
      up_[i * ny + k] = d2 + b / (2.0 * dy);
    }
  }
  if (options_.richardson) {
    if (ny % 2 == 0 || ny < 9)
      throw ValidationError("grid.n_y", "Richardson extrapolation needs an odd n_y >= 9");
    const Grid coarse(grid.horizon(), nt, grid.y_min(), grid.y_max(), (ny + 1) / 2);
    ScalarField2D cb(coarse);
    ScalarField2D cc(coarse);
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t k = 0; k < coarse.n_y(); ++k) {
        cb(i, k) = drift(i, 2 * k);
        cc(i, k) = reaction ? (*reaction)(i, 2 * k) : 0.0;
      }
    PdeOptions single = options_;
    single.richardson = false;
    // A geometric boundary ratio E over dy becomes E^2 over 2 dy.
    coarse_ = std::make_shared<const BackwardSolver>(
        coarse, diffusion, cb, reaction ? &cc : nullptr,
        std::pair{e_left_ * e_left_, e_right_ * e_right_}, single);
  }
  theta_factors_.reserve(nt - 1);
  for (std::size_t n = 0; n + 1 < nt; ++n) theta_factors_.push_back(factor(n, options_.theta));
  if (options_.implicit_startup && options_.theta != 1.0) {
    euler_factors_.reserve(nt - 1);
    for (std::size_t n = 0; n + 1 < nt; ++n) euler_factors_.push_back(factor(n, 1.0));
  }
}

BackwardSolver::Factor BackwardSolver::factor(std::size_t n, double w) const {
  const std::size_t ny = grid_.n_y();
  const std::size_t m = ny - 1;
  const double wdt = w * grid_.dt();
  Factor f;
  f.sub.assign(ny, 0.0);
  f.cprime.assign(ny, 0.0);
  f.inv_den.assign(ny, 0.0);
  double prev_c = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    double a = -wdt * lo_[n * ny + k];
    double b = 1.0 - wdt * di_[n * ny + k];
    double c = -wdt * up_[n * ny + k];
    const bool modified = (k == 1) || (k == m - 1);
    if (!modified && !(std::abs(b) > std::abs(a) + std::abs(c))) {
      std::ostringstream os;
      os << "system not diagonally dominant at y=" << grid_.y(k) << " (|diag|=" << std::abs(b)
         << ", |off|=" << std::abs(a) + std::abs(c) << ")";
      throw SolverError(n, os.str());
    }
    if (k == 1) {
      b += a * (1.0 + e_left_);
      c -= a * e_left_;
      a = 0.0;
    }
    if (k == m - 1) {
      b += c * (1.0 + e_right_);
      a -= c * e_right_;
      c = 0.0;
    }
    const double den = b - a * prev_c;
    if (!std::isfinite(den) || std::abs(den) < 1e-300) {
      std::ostringstream os;
      os << "degenerate pivot at y=" << grid_.y(k);
      throw SolverError(n, os.str());
    }
    f.sub[k] = a;
    f.inv_den[k] = 1.0 / den;
    f.cprime[k] = c / den;
    prev_c = f.cprime[k];
  }
  return f;
}

void BackwardSolver::step(std::size_t n, bool startup, std::span<const double> u_next,
                          std::span<const double> source_n, std::span<const double> source_next,
                          std::span<double> u_out, std::span<double> scratch) const {
  const std::size_t ny = grid_.n_y();
  const std::size_t m = ny - 1;
  const double dt = grid_.dt();
  const bool euler = startup && options_.implicit_startup;
  const double w = euler ? 1.0 : options_.theta;
  const Factor& f = (euler && !euler_factors_.empty()) ? euler_factors_[n] : theta_factors_[n];
  const double explicit_w = (1.0 - w) * dt;
  const double* lo = lo_.data() + (n + 1) * ny;
  const double* di = di_.data() + (n + 1) * ny;
  const double* up = up_.data() + (n + 1) * ny;
  const bool has_src = !source_n.empty();

  double prev = 0.0;
  for (std::size_t k = 1; k < m; ++k) {
    double d = u_next[k];
    if (explicit_w != 0.0)
      d += explicit_w * (lo[k] * u_next[k - 1] + di[k] * u_next[k] + up[k] * u_next[k + 1]);
    if (has_src) d += dt * (w * source_n[k] + (1.0 - w) * source_next[k]);
    prev = (d - f.sub[k] * prev) * f.inv_den[k];
    scratch[k] = prev;
  }
  u_out[m - 1] = scratch[m - 1];
  for (std::size_t k = m - 1; k-- > 1;) u_out[k] = scratch[k] - f.cprime[k] * u_out[k + 1];
  u_out[0] = (1.0 + e_left_) * u_out[1] - e_left_ * u_out[2];
  u_out[m] = (1.0 + e_right_) * u_out[m - 1] - e_right_ * u_out[m - 2];
}

void BackwardSolver::combine(std::span<const double> fine, std::span<const double> coarse,
                             std::span<double> out, std::span<double> corr) const {
  const std::size_t nc = coarse.size();
  for (std::size_t m = 0; m < nc; ++m) corr[m] = fine[2 * m] - coarse[m];
  for (std::size_t m = 0; m < nc; ++m) out[2 * m] = fine[2 * m] + corr[m] / 3.0;
  for (std::size_t m = 0; m + 1 < nc; ++m) {
    const double mid = (m >= 1 && m + 2 < nc)
                           ? (9.0 * (corr[m] + corr[m + 1]) - corr[m - 1] - corr[m + 2]) / 16.0
                           : 0.5 * (corr[m] + corr[m + 1]);
    out[2 * m + 1] = fine[2 * m + 1] + mid / 3.0;
  }
}

void BackwardSolver::march(
    std::size_t last, std::span<const double> terminal,
    const std::function<std::span<const double>(std::size_t)>& source,
    const std::function<void(std::size_t, std::span<const double>)>& on_row) const {
  const std::size_t ny = grid_.n_y();
  std::vector<double> a(terminal.begin(), terminal.end());
  std::vector<double> b(ny);
  std::vector<double> scratch(ny);
  on_row(last, a);

  const std::size_t nc = coarse_ ? coarse_->grid().n_y() : 0;
  std::vector<double> ca(nc), cb(nc), cs_n(nc), cs_next(nc), out(coarse_ ? ny : 0), corr(nc);
  for (std::size_t m = 0; m < nc; ++m) ca[m] = terminal[2 * m];

  for (std::size_t i = last; i-- > 0;) {
    std::span<const double> src_n;
    std::span<const double> src_next;
    if (source) {
      src_n = source(i);
      src_next = source(i + 1);
    }
    step(i, i + 1 == last, a, src_n, src_next, b, scratch);
    if (coarse_) {
      std::span<const double> c_n;
      std::span<const double> c_next;
      if (source) {
        for (std::size_t m = 0; m < nc; ++m) {
          cs_n[m] = src_n[2 * m];
          cs_next[m] = src_next[2 * m];
        }
        c_n = cs_n;
        c_next = cs_next;
      }
      coarse_->step(i, i + 1 == last, ca, c_n, c_next, cb, scratch);
      combine(b, cb, out, corr);
      on_row(i, out);
      ca.swap(cb);
    } else {
      on_row(i, b);
    }
    a.swap(b);
  }
}

ScalarField2D solve_backward(const Grid& grid, double diffusion, const CoefficientFn& drift,
                             const CoefficientFn& reaction, const CoefficientFn& source,
                             const std::function<double(double)>& terminal, PdeOptions options) {
  const auto zero = [](double, double) { return 0.0; };
  const ScalarField2D b = ScalarField2D::from_function(grid, drift ? drift : zero);
  const ScalarField2D c = ScalarField2D::from_function(grid, reaction ? reaction : zero);
  std::optional<ScalarField2D> f;
  if (source) f = ScalarField2D::from_function(grid, source);

  std::vector<double> g(grid.n_y());
  for (std::size_t j = 0; j < grid.n_y(); ++j) g[j] = terminal(grid.y(j));

  const BackwardSolver solver(grid, diffusion, b, reaction ? &c : nullptr,
                              boundary_ratios(g, options.boundary), options);
  ScalarField2D u(grid);
  std::function<std::span<const double>(std::size_t)> src;
  if (f) src = [&](std::size_t i) { return f->row(i); };
  solver.march(grid.n_t() - 1, g, src, [&](std::size_t i, std::span<const double> row) {
    std::copy(row.begin(), row.end(), u.row(i).begin());
  });
  return u;
}

}  // namespace tcm
