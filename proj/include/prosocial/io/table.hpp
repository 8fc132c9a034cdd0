#pragma once

// Tabular output shared by every subcommand: CSV (UTF-8, comma, dot
// decimal, header row) and a JSON {schema, columns, rows} document.
// Doubles are printed with 17 significant digits through std::to_chars,
// which ignores the global locale.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include "json.hpp"

#include "prosocial/error.hpp"

namespace prosocial::io {

using Cell = std::variant<std::int64_t, double, std::string>;

struct Table {
  std::string schema;  // e.g. "beliefs/v1"
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::logic_error("table row width mismatch in " + schema);
    rows.push_back(std::move(row));
  }
};

inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw IoError("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::int64_t parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw IoError("not an integer: '" + std::string(s) + "'");
  }
  return v;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string format_cell(const Cell& c) {
  if (const auto* i = std::get_if<std::int64_t>(&c)) return std::to_string(*i);
  if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
  return csv_escape(std::get<std::string>(c));
}

inline std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (j) out += ',';
    out += csv_escape(t.columns[j]);
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_cell(row[j]);
    }
    out += '\n';
  }
  return out;
}

inline std::string to_json(const Table& t) {
  nlohmann::ordered_json doc;
  doc["schema"] = t.schema;
  doc["columns"] = t.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& c : row) std::visit([&](const auto& v) { r.push_back(v); }, c);
    rows.push_back(std::move(r));
  }
  doc["rows"] = std::move(rows);
  return doc.dump(1) + "\n";
}

/// Header plus raw string fields. Handles quoted fields without embedded newlines.
struct CsvDocument {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return j;
    }
    throw IoError("missing CSV column '" + std::string(name) + "'");
  }
};

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

inline CsvDocument parse_csv(std::string_view text) {
  CsvDocument doc;
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = end + 1;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (first) {
      doc.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != doc.header.size()) throw IoError("CSV row has " + std::to_string(fields.size()) + " fields, header has " + std::to_string(doc.header.size()));
      doc.rows.push_back(std::move(fields));
    }
  }
  if (first) throw IoError("CSV input is empty");
  return doc;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes to a sibling temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

enum class Format { csv, json };

inline std::string_view extension(Format f) { return f == Format::csv ? ".csv" : ".json"; }

inline std::string render(const Table& t, Format f) { return f == Format::csv ? to_csv(t) : to_json(t); }

}  // namespace prosocial::io
