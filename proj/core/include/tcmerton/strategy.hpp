#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcmerton/fixed_point.hpp"
#include "tcmerton/grid.hpp"
#include "tcmerton/model.hpp"
#include "tcmerton/pde.hpp"

namespace tcm {

/// p_bar(t,y): wealth as a function of the log marginal value y, with p_bar_y.
struct PBarField {
  ScalarField2D pbar;
  ScalarField2D pbar_y;
};

/// Solves p_t + (theta^2/2) p_yy + (theta^2/2 + rho_bar - r) p_y - r p + I0 = 0,
/// p(T,y) = I0(y). The terminal row of p_y is the exact I0'. Throws
/// IntegrityError naming the first node with p <= 0 or p_y >= 0.
PBarField compute_pbar(const Problem& problem, const ScalarField2D& rho_bar,
                       const PdeOptions& pde = {});

struct StrategySurface {
  /// Fraction of wealth held in the stock.
  ScalarField2D pi_star;
  /// Consumption per unit of wealth.
  ScalarField2D c_star;
};

/// pi* = -theta p_y / (sigma p), c* = I0 / p, node by node.
StrategySurface controls_from_pbar(const Problem& problem, const PBarField& pb);

/// Lower and upper bounds of p_bar / I0 at time t, from the Gaussian moment
/// bounds E[exp(-k|Z|)] >= exp(-3k^2/2)/2 and E[exp(k|Z|)] <= 2 exp(k^2/2)
/// integrated over [t,T].
double ratio_bound_lower(const Problem& problem, double t);
double ratio_bound_upper(const Problem& problem, double t);

/// Gaussian tail bound used by ratio_bound_lower: N(-x) >= exp(-2 x^2) / 4.
double normal_tail_lower(double x);

/// p_bar at an arbitrary time: rows of log p_bar and d/dy log p_bar blended
/// linearly in t, evaluated in y by cubic Hermite interpolation.
class PBarInterpolator {
 public:
  struct Slice {
    double t;
    std::vector<double> log_p;
    std::vector<double> slope;
  };

  PBarInterpolator(const Problem& problem, const PBarField& pb);

  const Grid& grid() const noexcept { return grid_; }
  /// Throws RangeError if t is outside [0,T].
  Slice slice(double t) const;
  void slice_into(double t, Slice& out) const;

  double log_pbar(const Slice& s, double y) const;
  /// d/dy log p_bar; pi* = -(theta/sigma) times this.
  double log_slope(const Slice& s, double y) const;
  /// y with |p_bar(t,y) - x| <= tol x. Throws RangeError if x is outside
  /// [p_bar(t, y_max), p_bar(t, y_min)].
  double invert(const Slice& s, double x, double tol = 1e-10) const;
  double invert_log(const Slice& s, double log_x, double tol = 1e-10) const;

  /// log I0 by Hermite interpolation of nodal values and exact slopes.
  double log_I0(double y) const;

 private:
  Grid grid_;
  std::vector<double> log_p_;
  std::vector<double> slope_;
  std::vector<double> log_i0_;
  std::vector<double> log_i0_slope_;
};

/// y(t,x) solving p_bar(t,y) = x.
double invert_pbar(const PBarInterpolator& interp, double t, double x);
/// v(t,x) = exp(y(t,x)).
double marginal_value(const PBarInterpolator& interp, double t, double x);

/// G in y-coordinates on the grid: G(t,y) = sum_j w h(t,s_j) delta_bar(t,s_j,y),
/// with the y-derivative for Hermite evaluation, and the matching sum with dh/dt.
struct ValueSurface {
  ScalarField2D g;
  ScalarField2D g_y;
  ScalarField2D k;
};

ValueSurface value_surface(const OperatorWorkspace& ws);

/// G(t_i, x) at a time node via inversion of p_bar.
double value_at(const ValueSurface& vs, const PBarInterpolator& interp, std::size_t i, double x);

struct ValueRow {
  double t;
  double x;
  double y;
  double g;
  double v;
};

/// Table of (t, x, y, G, v) on the given time nodes and wealth levels.
std::vector<ValueRow> value_function(const ValueSurface& vs, const PBarInterpolator& interp,
                                     std::span<const std::size_t> t_indices,
                                     std::span<const double> wealth);

}  // namespace tcm
