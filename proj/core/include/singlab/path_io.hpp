#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "singlab/path.hpp"

namespace singlab {

/// CSV with header `t,x_1_1,...,x_n_d` (body index, then coordinate index).
void write_path_csv(const Path& path, const std::filesystem::path& file);
std::string path_csv(const Path& path);
/// Reads a path written by write_path_csv; the metric fixes n and d.
Path read_path_csv(const std::filesystem::path& file, const MassMetric& metric);
Path parse_path_csv(const std::string& text, const MassMetric& metric);

/// Named columns sharing one length.
struct Series {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  void add(std::string name, std::vector<double> column);
  std::size_t rows() const;
};

std::string series_csv(const Series& series);
void write_series_csv(const Series& series, const std::filesystem::path& file);
/// Per-column {min, max, mean, finite_count} over finite entries.
nlohmann::json series_summary(const Series& series);
/// Writes `file` and a `<file>.json` sidecar with the summary statistics.
void write_series_with_sidecar(const Series& series, const std::filesystem::path& file);

/// Quotes a CSV field when it contains separators, quotes or newlines.
std::string csv_field(const std::string& field);

}  // namespace singlab
