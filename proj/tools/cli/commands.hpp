#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include "config.hpp"

namespace tcm::cli {

/// Environment variable that overrides [output] directory (--out wins over it).
inline constexpr const char* kOutputEnv = "TCMERTON_OUT";

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool strict = false;
  std::optional<double> t0;
  std::optional<double> x0;
};

std::filesystem::path output_dir(const RunConfig& cfg, const CommandOptions& opts);

/// Exit codes: 0 success, 1 non-convergence or failed checks.
int cmd_solve(const CommandOptions& opts, std::ostream& log);
int cmd_simulate(const CommandOptions& opts, std::ostream& log);
int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& log);

}  // namespace tcm::cli
