#include "tcmerton/grid.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tcmerton/errors.hpp"

namespace tcm {

Grid::Grid(double horizon, std::size_t n_t, double y_min, double y_max, std::size_t n_y) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("grid.T", "must be > 0");
  if (n_t < 3) throw ValidationError("grid.n_t", "need at least 3 time nodes");
  if (n_y < 5) throw ValidationError("grid.n_y", "need at least 5 space nodes");
  if (!(y_min < y_max) || !std::isfinite(y_min) || !std::isfinite(y_max))
    throw ValidationError("grid.y_min", "need finite y_min < y_max");
  dt_ = horizon / static_cast<double>(n_t - 1);
  dy_ = (y_max - y_min) / static_cast<double>(n_y - 1);
  t_.resize(n_t);
  y_.resize(n_y);
  for (std::size_t i = 0; i < n_t; ++i) t_[i] = static_cast<double>(i) * dt_;
  t_.back() = horizon;
  for (std::size_t j = 0; j < n_y; ++j) y_[j] = y_min + static_cast<double>(j) * dy_;
  y_.back() = y_max;
}

std::size_t Grid::t_index(double t) const {
  const double pos = t / dt_;
  const double idx = std::round(pos);
  if (idx < 0.0 || idx > static_cast<double>(n_t() - 1) || std::abs(pos - idx) > 1e-9) {
    std::ostringstream os;
    os << "t=" << t << " is not a node of the time grid (dt=" << dt_ << ")";
    throw RangeError(os.str());
  }
  return static_cast<std::size_t>(idx);
}

ScalarField2D::ScalarField2D(Grid grid, double fill)
    : grid_(std::move(grid)), values_(grid_.n_t() * grid_.n_y(), fill) {}

ScalarField2D::ScalarField2D(Grid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.n_t() * grid_.n_y())
    throw ValidationError("field", "value count does not match grid size");
}

ScalarField2D ScalarField2D::from_function(const Grid& grid,
                                           const std::function<double(double, double)>& f) {
  ScalarField2D out(grid);
  for (std::size_t i = 0; i < grid.n_t(); ++i)
    for (std::size_t j = 0; j < grid.n_y(); ++j) out(i, j) = f(grid.t(i), grid.y(j));
  return out;
}

double ScalarField2D::bilinear(double t, double y) const {
  const auto& g = grid_;
  const double eps = 1e-9 * g.dt();
  if (t < -eps || t > g.horizon() + eps) {
    std::ostringstream os;
    os << "t=" << t << " outside [0," << g.horizon() << "]";
    throw RangeError(os.str());
  }
  const Cell ct = locate(t, 0.0, g.dt(), g.n_t());
  const Cell cy = locate(y, g.y_min(), g.dy(), g.n_y());
  const double a = (*this)(ct.k, cy.k) + cy.s * ((*this)(ct.k, cy.k + 1) - (*this)(ct.k, cy.k));
  const double b =
      (*this)(ct.k + 1, cy.k) + cy.s * ((*this)(ct.k + 1, cy.k + 1) - (*this)(ct.k + 1, cy.k));
  return a + ct.s * (b - a);
}

void ScalarField2D::require_finite(const char* name) const {
  for (std::size_t i = 0; i < grid_.n_t(); ++i)
    for (std::size_t j = 0; j < grid_.n_y(); ++j)
      if (!std::isfinite((*this)(i, j))) {
        std::ostringstream os;
        os << name << " is not finite at node (t=" << grid_.t(i) << ", y=" << grid_.y(j) << ")";
        throw IntegrityError(os.str());
      }
}

double ScalarField2D::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

void d_dy_row(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  if (n < 5) throw ValidationError("grid.n_y", "derivative stencils need at least 5 nodes");
  const double c = 1.0 / (12.0 * h);
  out[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
  out[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
  for (std::size_t j = 2; j + 2 < n; ++j)
    out[j] = c * (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]);
  const std::size_t m = n - 1;
  out[m - 1] = -c * (-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] + f[m - 4]);
  out[m] = -c * (-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] - 3.0 * f[m - 4]);
}

void d2_dy2_row(std::span<const double> f, double h, std::span<double> out) {
  const std::size_t n = f.size();
  if (n < 5) throw ValidationError("grid.n_y", "derivative stencils need at least 5 nodes");
  const double c = 1.0 / (12.0 * h * h);
  out[0] = c * (35.0 * f[0] - 104.0 * f[1] + 114.0 * f[2] - 56.0 * f[3] + 11.0 * f[4]);
  out[1] = c * (11.0 * f[0] - 20.0 * f[1] + 6.0 * f[2] + 4.0 * f[3] - f[4]);
  for (std::size_t j = 2; j + 2 < n; ++j)
    out[j] = c * (-f[j - 2] + 16.0 * f[j - 1] - 30.0 * f[j] + 16.0 * f[j + 1] - f[j + 2]);
  const std::size_t m = n - 1;
  out[m - 1] = c * (11.0 * f[m] - 20.0 * f[m - 1] + 6.0 * f[m - 2] + 4.0 * f[m - 3] - f[m - 4]);
  out[m] = c * (35.0 * f[m] - 104.0 * f[m - 1] + 114.0 * f[m - 2] - 56.0 * f[m - 3] + 11.0 * f[m - 4]);
}

ScalarField2D d_dy(const ScalarField2D& field) {
  ScalarField2D out(field.grid());
  for (std::size_t i = 0; i < field.grid().n_t(); ++i)
    d_dy_row(field.row(i), field.grid().dy(), out.row(i));
  return out;
}

ScalarField2D d2_dy2(const ScalarField2D& field) {
  ScalarField2D out(field.grid());
  for (std::size_t i = 0; i < field.grid().n_t(); ++i)
    d2_dy2_row(field.row(i), field.grid().dy(), out.row(i));
  return out;
}

Cell locate(double y, double y0, double dy, std::size_t n) {
  const double pos = (y - y0) / dy;
  const double last = static_cast<double>(n - 1);
  if (!(pos > 0.0)) return {0, 0.0};
  if (pos >= last) return {n - 2, 1.0};
  auto k = static_cast<std::size_t>(pos);
  if (k > n - 2) k = n - 2;
  return {k, pos - static_cast<double>(k)};
}

double hermite(const Cell& c, std::span<const double> v, std::span<const double> m, double dy) {
  const double s = c.s;
  const double s2 = s * s;
  const double s3 = s2 * s;
  const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
  const double h10 = s3 - 2.0 * s2 + s;
  const double h01 = -2.0 * s3 + 3.0 * s2;
  const double h11 = s3 - s2;
  return h00 * v[c.k] + h10 * dy * m[c.k] + h01 * v[c.k + 1] + h11 * dy * m[c.k + 1];
}

double hermite_slope(const Cell& c, std::span<const double> v, std::span<const double> m,
                     double dy) {
  const double s = c.s;
  const double s2 = s * s;
  const double d00 = 6.0 * s2 - 6.0 * s;
  const double d10 = 3.0 * s2 - 4.0 * s + 1.0;
  const double d11 = 3.0 * s2 - 2.0 * s;
  return d00 * (v[c.k] - v[c.k + 1]) / dy + d10 * m[c.k] + d11 * m[c.k + 1];
}

}  // namespace tcm
