#pragma once

// CSV ingest and emission for cost datasets and factorial designs.
//
// Cost dataset:  server_cost,power_cooling_cost[,revenue]
// Design:        x_A,x_B,revenue   (one line per observation; replicates of a
//                cell appear as repeated (x_A, x_B) pairs)
//
// Header names are matched case-insensitively; unknown columns are ignored.
// Row numbers in errors count data rows from 1 (the header is not a row).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "revdoe/dataset.hpp"
#include "revdoe/error.hpp"
#include "revdoe/factorial.hpp"

namespace revdoe::io {

class CsvError : public ValidationError {
 public:
  CsvError(std::string source, std::size_t row, std::string column, const std::string& what)
      : ValidationError(source + ": " + (row > 0 ? "row " + std::to_string(row) + ", " : std::string()) +
                        (column.empty() ? std::string() : "column " + column + ": ") + what),
        row_(row),
        column_(std::move(column)) {}

  [[nodiscard]] std::size_t row() const noexcept { return row_; }
  [[nodiscard]] const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

/// Shortest decimal that round-trips to the same double.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

struct CsvTable {
  std::string source;
  std::vector<std::string> header;  // lower-cased
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_number(const CsvTable& t, std::size_t row, std::size_t col) {
  const std::string& field = t.rows[row][col];
  double v = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  if (!field.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (field.empty() || res.ec != std::errc() || res.ptr != last) {
    throw CsvError(t.source, row + 1, t.header[col], "malformed number '" + field + "'");
  }
  return v;
}

inline std::size_t require_column(const CsvTable& t, std::string_view name) {
  if (auto c = t.column(name)) return *c;
  throw CsvError(t.source, 0, std::string(name), "missing column");
}

}  // namespace detail

inline CsvTable parse_csv(std::string_view text, std::string source = "<csv>") {
  CsvTable t;
  t.source = std::move(source);
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  std::size_t pos = 0;
  bool have_header = false;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    if (detail::trim(line).empty()) {
      if (nl == text.size()) break;
      continue;
    }
    auto fields = detail::split_line(line);
    if (!have_header) {
      for (auto& f : fields)
        std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      t.header = std::move(fields);
      have_header = true;
    } else {
      if (fields.size() != t.header.size()) {
        throw CsvError(t.source, t.rows.size() + 1, "",
                       "expected " + std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
      }
      t.rows.push_back(std::move(fields));
    }
    if (nl == text.size()) break;
  }
  if (!have_header) throw CsvError(t.source, 0, "", "empty file (no header row)");
  if (t.rows.empty()) throw CsvError(t.source, 0, "", "no data rows");
  return t;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool is_design_table(const CsvTable& t) { return t.column("x_a") && t.column("x_b"); }

inline CostDataset to_cost_dataset(const CsvTable& t) {
  const auto server = detail::require_column(t, "server_cost");
  const auto power = detail::require_column(t, "power_cooling_cost");
  const auto revenue = t.column("revenue");
  CostDataset data;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CostRow row{detail::parse_number(t, i, server), detail::parse_number(t, i, power), std::nullopt};
    if (revenue) row.revenue = detail::parse_number(t, i, *revenue);
    try {
      data.push_back(row);
    } catch (const ValidationError& e) {
      throw CsvError(t.source, i + 1, "", e.what());
    }
  }
  return data;
}

inline Design22 to_design(const CsvTable& t) {
  const auto xa = detail::require_column(t, "x_a");
  const auto xb = detail::require_column(t, "x_b");
  const auto revenue = detail::require_column(t, "revenue");
  Design22::Cells cells;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    auto level = [&](std::size_t col) {
      const double v = detail::parse_number(t, i, col);
      if (v != -1.0 && v != 1.0) throw CsvError(t.source, i + 1, t.header[col], "level code must be -1 or 1");
      return static_cast<int>(v);
    };
    const int a = level(xa);
    const int b = level(xb);
    cells[revdoe::detail::cell_index(a, b)].push_back(detail::parse_number(t, i, revenue));
  }
  try {
    return Design22(std::move(cells));
  } catch (const ValidationError& e) {
    throw CsvError(t.source, 0, "", e.what());
  }
}

/// Parses a CSV and decides its kind from the header: x_A/x_B columns make a
/// design, otherwise a cost dataset.
inline std::variant<CostDataset, Design22> ingest_csv_text(std::string_view text, std::string source = "<csv>") {
  const CsvTable t = parse_csv(text, std::move(source));
  if (is_design_table(t)) return to_design(t);
  return to_cost_dataset(t);
}

inline std::variant<CostDataset, Design22> ingest_csv(const std::filesystem::path& path) {
  return ingest_csv_text(read_file(path), path.filename().string());
}

inline CostDataset read_cost_dataset(const std::filesystem::path& path) {
  auto v = ingest_csv(path);
  if (auto* d = std::get_if<CostDataset>(&v)) return std::move(*d);
  throw ValidationError(path.string() + ": expected a cost dataset (server_cost, power_cooling_cost[, revenue])");
}

inline Design22 read_design(const std::filesystem::path& path) {
  auto v = ingest_csv(path);
  if (auto* d = std::get_if<Design22>(&v)) return std::move(*d);
  throw ValidationError(path.string() + ": expected a design (x_A, x_B, revenue)");
}

inline void write_cost_dataset(std::ostream& os, const CostDataset& data) {
  const bool revenue = data.has_revenue();
  os << "server_cost,power_cooling_cost" << (revenue ? ",revenue" : "") << '\n';
  for (const auto& r : data.rows()) {
    os << format_number(r.server_cost) << ',' << format_number(r.power_cooling_cost);
    if (revenue) os << ',' << format_number(*r.revenue);
    os << '\n';
  }
}

inline void write_design(std::ostream& os, const Design22& design) {
  os << "x_A,x_B,revenue\n";
  for (std::size_t rep = 0; rep < design.replicates(); ++rep)
    for (std::size_t k = 0; k < 4; ++k)
      os << kCellLevels[k].x_a << ',' << kCellLevels[k].x_b << ',' << format_number(design.cell(k)[rep]) << '\n';
}

}  // namespace revdoe::io
