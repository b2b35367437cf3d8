#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "tcmerton/grid.hpp"
#include "tcmerton/montecarlo.hpp"
#include "tcmerton/pipeline.hpp"

namespace tcm {

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

struct NamedField {
  std::string name;
  const ScalarField2D* field;
};

/// Columns t, y, then one column per field, one row per grid node (t-major).
void write_fields_csv(const std::filesystem::path& path, std::span<const NamedField> fields);

/// Reads one column of a file written by write_fields_csv back onto its grid.
/// Throws IntegrityError if the nodes are not a uniform tensor grid.
ScalarField2D read_field_csv(const std::filesystem::path& path, const std::string& column);

/// t, y, pbar, pi_star, c_star
void write_strategy_csv(const std::filesystem::path& path, const Solution& sol);
/// t, x, y, G, v
void write_value_csv(const std::filesystem::path& path, std::span<const ValueRow> rows);
/// path, time, y, x, c, pi
void write_paths_csv(const std::filesystem::path& path, const PathEnsemble& ens);

/// Writes to a temporary sibling and renames it into place.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace tcm
