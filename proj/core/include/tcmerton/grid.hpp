#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace tcm {

/// Uniform tensor grid on [0,T] x [y_min, y_max].
class Grid {
 public:
  Grid(double horizon, std::size_t n_t, double y_min, double y_max, std::size_t n_y);

  std::size_t n_t() const noexcept { return t_.size(); }
  std::size_t n_y() const noexcept { return y_.size(); }
  double dt() const noexcept { return dt_; }
  double dy() const noexcept { return dy_; }
  double horizon() const noexcept { return t_.back(); }
  double y_min() const noexcept { return y_.front(); }
  double y_max() const noexcept { return y_.back(); }
  double t(std::size_t i) const { return t_[i]; }
  double y(std::size_t j) const { return y_[j]; }
  std::span<const double> t_nodes() const noexcept { return t_; }
  std::span<const double> y_nodes() const noexcept { return y_; }

  /// Index of the time node equal to t (within 1e-9 dt); throws RangeError otherwise.
  std::size_t t_index(double t) const;
  bool contains_y(double y) const noexcept { return y >= y_min() && y <= y_max(); }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    return a.t_ == b.t_ && a.y_ == b.y_;
  }

 private:
  std::vector<double> t_;
  std::vector<double> y_;
  double dt_;
  double dy_;
};

/// Real values of a function of (t,y) on a Grid, row-major in t.
class ScalarField2D {
 public:
  explicit ScalarField2D(Grid grid, double fill = 0.0);
  ScalarField2D(Grid grid, std::vector<double> values);

  static ScalarField2D from_function(const Grid& grid,
                                     const std::function<double(double, double)>& f);

  const Grid& grid() const noexcept { return grid_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * grid_.n_y() + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * grid_.n_y() + j]; }
  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * grid_.n_y(), grid_.n_y()};
  }
  std::span<double> row(std::size_t i) { return {values_.data() + i * grid_.n_y(), grid_.n_y()}; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Bilinear interpolation; y is clamped to the grid, t must lie in [0,T].
  double bilinear(double t, double y) const;
  /// Throws IntegrityError naming the first non-finite node.
  void require_finite(const char* name) const;
  double max_abs() const noexcept;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// First y-derivative of one row: 4th-order central differences at interior
/// nodes, 4th-order one-sided 5-point stencils at the two nodes nearest each
/// boundary. Requires at least 5 points.
void d_dy_row(std::span<const double> in, double dy, std::span<double> out);
/// Second y-derivative of one row, same stencil layout (3rd order at the ends).
void d2_dy2_row(std::span<const double> in, double dy, std::span<double> out);

ScalarField2D d_dy(const ScalarField2D& field);
ScalarField2D d2_dy2(const ScalarField2D& field);

/// Locate the cell [y_k, y_{k+1}] containing y on a uniform axis and the local
/// coordinate s in [0,1]. y is clamped to the axis.
struct Cell {
  std::size_t k;
  double s;
};
Cell locate(double y, double y0, double dy, std::size_t n);

/// Cubic Hermite interpolation of (values, slopes) sampled on a uniform axis.
double hermite(const Cell& c, std::span<const double> values, std::span<const double> slopes,
               double dy);
/// Derivative of the cubic Hermite interpolant.
double hermite_slope(const Cell& c, std::span<const double> values,
                     std::span<const double> slopes, double dy);

}  // namespace tcm
