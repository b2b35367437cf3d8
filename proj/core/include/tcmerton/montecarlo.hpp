#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "tcmerton/grid.hpp"
#include "tcmerton/model.hpp"
#include "tcmerton/strategy.hpp"

namespace tcm {

struct McOptions {
  std::size_t n_paths = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 20240601;
  /// Path 2k+1 uses the negated increments of path 2k.
  bool antithetic = true;
  /// Noise draws per random stream; streams are keyed by (seed, block index).
  std::size_t block = 256;
  /// Fraction of paths allowed to leave [y_min, y_max] before RangeError.
  double max_exit_fraction = 0.01;
};

/// Standard normal increments for draw index u: one engine per block of
/// `block` draws, seeded from (seed, u / block), so any draw can be
/// regenerated independently of evaluation order.
class NoiseSource {
 public:
  NoiseSource(std::uint64_t seed, std::size_t n_steps, std::size_t block);
  void draw(std::size_t u, std::span<double> z);

 private:
  void reseed(std::size_t block_index);

  std::uint64_t seed_;
  std::size_t n_steps_;
  std::size_t block_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
  std::size_t next_ = 0;
  bool fresh_ = false;
};

/// Number of steps of size close to dt spanning [t0, T]; throws ValidationError
/// if dt does not divide T - t0 to within 1e-9 relative.
std::size_t step_count(double t0, double horizon, double dt);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
  /// Independent samples (antithetic pairs count once).
  std::size_t samples = 0;
};

/// Mean and standard error of per-path values, pairing antithetic paths.
McEstimate summarize(std::span<const double> per_path, bool antithetic);

struct PathEnsemble {
  std::uint64_t seed = 0;
  double t0 = 0.0;
  double y0 = 0.0;
  double dt = 0.0;
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  bool antithetic = true;
  std::size_t block = 256;
  /// n_paths x (n_steps + 1), row per path.
  std::vector<double> y;
  /// Filled by simulate_wealth, same layout as y.
  std::vector<double> x;
  std::vector<double> c;
  std::vector<double> pi;
  /// Paths that left the y-range of the grid.
  std::size_t n_exited = 0;

  double time(std::size_t n) const { return t0 + static_cast<double>(n) * dt; }
  std::span<const double> y_path(std::size_t p) const {
    return {y.data() + p * (n_steps + 1), n_steps + 1};
  }
  std::span<const double> x_path(std::size_t p) const {
    return {x.data() + p * (n_steps + 1), n_steps + 1};
  }
  bool has_wealth() const noexcept { return !x.empty(); }
};

/// Euler paths of dY = (-theta^2/2 - r + rho_bar(s,Y)) ds - theta dW with
/// rho_bar bilinear at the step midpoint. Throws RangeError if more than
/// max_exit_fraction of the paths leave the grid.
PathEnsemble simulate_Y(const Problem& problem, const ScalarField2D& rho_bar, double t0, double y0,
                        const McOptions& options);

/// Log-Euler wealth paths with the feedback controls, driven by the same
/// increments as `ens`: dX = (r + sigma theta pi - c) X ds + sigma pi X dW.
/// Controls are read from p_bar by inverting X at each step.
void simulate_wealth(const Problem& problem, const PBarInterpolator& interp, double x0,
                     PathEnsemble& ens);

/// E[ int_t0^T h(t0,s) U(c_s X_s) ds + h(t0,T) U(X_T) ], trapezoid along paths.
McEstimate estimate_J(const Problem& problem, const PathEnsemble& ens);

/// Per path max_s |X_s - p_bar(s, Y_s)| / X_s.
std::vector<double> wealth_identity_gaps(const PathEnsemble& ens, const PBarInterpolator& interp);

/// Constant controls (pi, c) on [t0, until), equilibrium controls afterwards.
struct Deviation {
  double until;
  double pi;
  double c;
};

struct EquilibriumStats {
  McEstimate J;
  /// Per path wealth-identity gaps (empty unless requested).
  std::vector<double> gaps;
  std::vector<double> terminal_wealth;
  /// Time-average consumption rate along each path.
  std::vector<double> mean_consumption;
  std::size_t n_exited = 0;
  /// First `export_paths` paths in full.
  PathEnsemble exported;
};

/// Streams paths (no ensemble storage) of Y_bar and X from (t0, x0) with
/// Y_bar(t0) = y(t0, x0). `rho_bar` is needed only when gaps are requested.
EquilibriumStats run_equilibrium(const Problem& problem, const ScalarField2D& rho_bar,
                                 const PBarInterpolator& interp, double t0, double x0,
                                 const McOptions& options, bool with_gaps,
                                 std::size_t export_paths = 0);

/// J(eq) - J(deviation) under common noise.
McEstimate estimate_deviation(const Problem& problem, const PBarInterpolator& interp, double t0,
                              double x0, const Deviation& dev, const McOptions& options);

/// F[phi](t_i, y) from delta_y(t,s,y) = E[U0'(Y_s) exp(int_t^s phi_y(u, Y_u) du)] with
/// dY = (phi - r - theta^2/2) du + theta dW, using the same s-quadrature as the
/// PDE operator. `substeps` Euler steps per grid interval. Ratio estimator;
/// standard error by the delta method.
McEstimate estimate_F_mc(const Problem& problem, const ScalarField2D& phi, std::size_t t_index,
                         double y, std::size_t n_paths, std::uint64_t seed,
                         std::size_t substeps = 4);

/// p_bar(t_i, y) = E[ int_t^T e^{-r(s-t)} I0(Y_s + theta^2 (s-t)) ds
///                    + e^{-r(T-t)} I0(Y_T + theta^2 (T-t)) ] with Y as in simulate_Y.
McEstimate estimate_pbar_fk(const Problem& problem, const ScalarField2D& rho_bar,
                            std::size_t t_index, double y, std::size_t n_paths, std::uint64_t seed,
                            std::size_t substeps = 4);

}  // namespace tcm
