#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcmerton/fixed_point.hpp"
#include "tcmerton/grid.hpp"
#include "tcmerton/model.hpp"
#include "tcmerton/montecarlo.hpp"

namespace tcm::cli {

struct GridConfig {
  std::size_t n_t = 401;
  std::size_t n_y = 401;
  /// Either an explicit y-range or a wealth range padded in y. Without a pad,
  /// a wealth range is widened by 6 theta sqrt(T) and the x0-centred range is +-8.
  std::optional<double> y_min;
  std::optional<double> y_max;
  std::optional<double> x_lo;
  std::optional<double> x_hi;
  std::optional<double> pad;
};

struct SolverConfig {
  double tol = 1e-8;
  std::size_t max_iter = 50;
  double damping = 1.0;
  std::optional<double> kappa;
  double cn_theta = 0.5;
  bool richardson = true;
};

struct McConfig {
  std::size_t n_paths = 10000;
  double dt = 1e-3;
  std::uint64_t seed = 20240601;
  bool antithetic = true;
  double t0 = 0.0;
  double x0 = 1.0;
  std::size_t export_paths = 100;
};

struct VerifyConfig {
  bool monte_carlo = true;
  bool hjb_refine = true;
  std::vector<double> wealth = {0.5, 1.0, 2.0};
  std::size_t value_paths = 100000;
  std::size_t operator_paths = 200000;
  std::size_t identity_paths = 10000;
  std::size_t perturbation_paths = 20000;
  std::vector<double> epsilons = {0.2, 0.1, 0.05};
  std::vector<double> identity_dts = {4e-3, 1e-3, 2.5e-4};
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<double> value_wealth = {0.25, 0.5, 1.0, 2.0, 4.0};
  std::size_t value_t_stride = 10;
};

/// Parsed and validated run configuration. `entries` keeps every key as
/// written, for echoing into meta.json.
struct RunConfig {
  Problem problem;
  GridConfig grid;
  SolverConfig solver;
  McConfig mc;
  VerifyConfig verify;
  OutputConfig output;
  std::map<std::string, std::string> entries;

  Grid make_grid() const;
  FixedPointOptions fixed_point_options() const;
  McOptions mc_options() const;
};

/// Reads an INI file. Unknown sections or keys, malformed numbers and model
/// constraint violations raise ValidationError naming "section.key".
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text);

}  // namespace tcm::cli
