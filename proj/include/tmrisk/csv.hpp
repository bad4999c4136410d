#pragma once

// Minimal CSV reading/writing plus conversion between CSV tables and
// schema-conformant patient records. Lines starting with '#' are comments.

#include <cerrno>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tmrisk/error.hpp"
#include "tmrisk/schema.hpp"

namespace tmrisk {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    return std::nullopt;
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) throw IoError("unterminated quote in CSV line");
  cells.push_back(std::move(cur));
  return cells;
}

inline std::string quote_cell(std::string_view cell) {
  if (cell.find_first_of(",\"\n") == std::string_view::npos) return std::string(cell);
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace detail

inline CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    auto cells = detail::split_csv_line(line);
    for (auto& c : cells) c = detail::trim(c);
    if (!have_header) {
      table.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.header.size())
      throw IoError("CSV line " + std::to_string(line_no) + ": expected " + std::to_string(table.header.size()) +
                    " cells, got " + std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw IoError("CSV has no header row");
  return table;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
  return parse_csv(in);
}

/// Writes `comments` as leading '#' lines, then the table.
inline void write_csv(std::ostream& out, const CsvTable& table, const std::vector<std::string>& comments = {}) {
  for (const auto& c : comments) out << "# " << c << '\n';
  auto row_out = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << detail::quote_cell(cells[i]);
    }
    out << '\n';
  };
  row_out(table.header);
  for (const auto& r : table.rows) row_out(r);
}

inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "': " + std::strerror(errno));
  out << content;
  if (!out) throw IoError("write failed for '" + path.string() + "': " + std::strerror(errno));
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "': " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_csv_file(const std::filesystem::path& path, const CsvTable& table,
                           const std::vector<std::string>& comments = {}) {
  std::ostringstream ss;
  write_csv(ss, table, comments);
  write_text_file(path, ss.str());
}

inline double parse_real(std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw EncodingError("'" + s + "' is not a number");
  return v;
}

inline bool parse_truth(std::string_view text) {
  if (text == "1" || text == "true" || text == "TRUE" || text == "True" || text == "yes") return true;
  if (text == "0" || text == "false" || text == "FALSE" || text == "False" || text == "no") return false;
  throw EncodingError("'" + std::string(text) + "' is not a truth value");
}

inline Outcome parse_label(std::string_view text) {
  if (text == "1") return Outcome::recurrence;
  if (text == "0") return Outcome::no_recurrence;
  throw EncodingError("label '" + std::string(text) + "' must be 0 or 1");
}

/// Maps table columns onto the schema. Extra columns are ignored; a missing
/// feature column or an empty cell is an error naming the feature and row.
/// The `label` column is read when present (required if `require_label`).
inline std::vector<PatientRecord> records_from_table(const CsvTable& table, const FeatureSchema& schema,
                                                     bool require_label = true) {
  const auto& specs = schema.specs();
  std::vector<std::size_t> cols;
  for (const auto& s : specs) {
    auto c = table.column(s.name);
    if (!c) throw EncodingError("data is missing column for feature '" + s.name + "'");
    cols.push_back(*c);
  }
  const auto label_col = table.column("label");
  if (require_label && !label_col) throw EncodingError("data is missing the 'label' column");

  std::vector<PatientRecord> records;
  records.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    PatientRecord rec;
    for (std::size_t f = 0; f < specs.size(); ++f) {
      const std::string& cell = row[cols[f]];
      try {
        if (cell.empty()) throw EncodingError("missing value");
        switch (specs[f].kind) {
          case FeatureKind::continuous: {
            const double v = parse_real(cell);
            if (!std::isfinite(v)) throw EncodingError("non-finite value");
            rec.values.emplace_back(v);
            break;
          }
          case FeatureKind::categorical:
            one_hot_encode(cell, specs[f].categories, specs[f].name);
            rec.values.emplace_back(cell);
            break;
          case FeatureKind::binary:
            rec.values.emplace_back(parse_truth(cell));
            break;
        }
      } catch (const EncodingError& e) {
        throw EncodingError("record " + std::to_string(r) + ", feature '" + specs[f].name + "': " + e.what());
      }
    }
    if (label_col) {
      try {
        rec.label = parse_label(row[*label_col]);
      } catch (const EncodingError& e) {
        throw EncodingError("record " + std::to_string(r) + ": " + e.what());
      }
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline std::string value_to_text(const FeatureValue& v) {
  if (const double* d = std::get_if<double>(&v)) return format_number(*d);
  if (const bool* b = std::get_if<bool>(&v)) return *b ? "1" : "0";
  return std::get<std::string>(v);
}

}  // namespace tmrisk
