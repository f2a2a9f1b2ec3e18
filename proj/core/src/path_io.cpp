#include "singlab/path_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "singlab/error.hpp"

namespace singlab {

namespace {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + file.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write to " + file.string() + " failed");
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string path_csv(const Path& path) {
  const MassMetric& m = path.metric();
  std::ostringstream os;
  os << "t";
  for (int i = 1; i <= m.bodies(); ++i)
    for (int k = 1; k <= m.dim(); ++k) os << ",x_" << i << "_" << k;
  os << "\n";
  for (std::size_t j = 0; j < path.size(); ++j) {
    os << number(path.time(j));
    for (int c = 0; c < m.size(); ++c) os << "," << number(path.point(j)(c));
    os << "\n";
  }
  return os.str();
}

void write_path_csv(const Path& path, const std::filesystem::path& file) { write_text(file, path_csv(path)); }

Path parse_path_csv(const std::string& text, const MassMetric& metric) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::IoError, "empty path CSV");
  const auto header = split_line(line);
  if (header.size() != static_cast<std::size_t>(metric.size()) + 1 || header[0] != "t") {
    throw Error(ErrorCode::IoError, "path CSV header does not match the mass metric");
  }
  std::vector<double> grid;
  std::vector<Vec> points;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::IoError, "path CSV row " + std::to_string(row) + " has the wrong field count");
    }
    Vec x(metric.size());
    try {
      grid.push_back(std::stod(fields[0]));
      for (int c = 0; c < metric.size(); ++c) x(c) = std::stod(fields[static_cast<std::size_t>(c) + 1]);
    } catch (const std::exception&) {
      throw Error(ErrorCode::IoError, "path CSV row " + std::to_string(row) + " is not numeric");
    }
    points.push_back(std::move(x));
  }
  return Path(metric, std::move(grid), std::move(points));
}

Path read_path_csv(const std::filesystem::path& file, const MassMetric& metric) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_path_csv(ss.str(), metric);
}

void Series::add(std::string name, std::vector<double> column) {
  if (!columns.empty() && column.size() != columns.front().size()) {
    throw Error(ErrorCode::GridMismatch, "series column '" + name + "' has a different length");
  }
  names.push_back(std::move(name));
  columns.push_back(std::move(column));
}

std::size_t Series::rows() const { return columns.empty() ? 0 : columns.front().size(); }

std::string series_csv(const Series& s) {
  std::ostringstream os;
  for (std::size_t c = 0; c < s.names.size(); ++c) os << (c ? "," : "") << csv_field(s.names[c]);
  os << "\n";
  for (std::size_t r = 0; r < s.rows(); ++r) {
    for (std::size_t c = 0; c < s.columns.size(); ++c) os << (c ? "," : "") << number(s.columns[c][r]);
    os << "\n";
  }
  return os.str();
}

void write_series_csv(const Series& series, const std::filesystem::path& file) { write_text(file, series_csv(series)); }

nlohmann::json series_summary(const Series& s) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t c = 0; c < s.columns.size(); ++c) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
    std::size_t count = 0;
    for (double v : s.columns[c]) {
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
      ++count;
    }
    nlohmann::json col = {{"finite_count", count}, {"rows", s.rows()}};
    if (count > 0) {
      col["min"] = lo;
      col["max"] = hi;
      col["mean"] = sum / static_cast<double>(count);
    }
    out[s.names[c]] = col;
  }
  return out;
}

void write_series_with_sidecar(const Series& series, const std::filesystem::path& file) {
  write_series_csv(series, file);
  std::filesystem::path sidecar = file;
  sidecar += ".json";
  write_text(sidecar, series_summary(series).dump(2) + "\n");
}

}  // namespace singlab
