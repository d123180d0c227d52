#pragma once

// Tabular datasets (named numeric columns) and the CSV reader/writer used for
// dataset ingestion, simulation dumps and the fine-tuning catalog.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cattr/error.hpp"
#include "cattr/text.hpp"

namespace cattr {

struct Column {
  std::string name;
  std::vector<double> values;

  bool operator==(const Column&) const = default;
};

class TabularDataset {
 public:
  TabularDataset() = default;

  TabularDataset(std::vector<Column> columns, std::string provenance = {})
      : columns_(std::move(columns)), provenance_(std::move(provenance)) {
    std::set<std::string> names;
    for (const auto& c : columns_) {
      if (trim(c.name).empty()) throw InvalidArgument("dataset column with empty name");
      if (!names.insert(c.name).second) throw InvalidArgument("duplicate dataset column: " + c.name);
      if (c.values.size() != columns_.front().values.size())
        throw InvalidArgument("dataset columns differ in length (" + c.name + ")");
    }
  }

  const std::vector<Column>& columns() const { return columns_; }
  const Column& column(std::size_t i) const { return columns_.at(i); }
  const Column& column(const std::string& name) const {
    for (const auto& c : columns_)
      if (c.name == name) return c;
    throw InvalidArgument("no column named " + name);
  }
  std::size_t n_columns() const { return columns_.size(); }
  std::size_t n_rows() const { return columns_.empty() ? 0 : columns_.front().values.size(); }
  const std::string& provenance() const { return provenance_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& c : columns_) out.push_back(c.name);
    return out;
  }

  bool operator==(const TabularDataset& o) const { return columns_ == o.columns_; }

 private:
  std::vector<Column> columns_;
  std::string provenance_;
};

// RFC 4180 style record splitting: quoted fields may contain commas,
// doubled quotes and newlines.
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false, field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    bool blank = row.size() == 1 && trim(row[0]).empty();
    if (!blank) rows.push_back(std::move(row));
    row.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
      ++line;
    } else if (c == '\r') {
      // tolerated before '\n'
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted CSV field", line);
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  return "\"" + replace_all(std::string(s), "\"", "\"\"") + "\"";
}

inline double parse_number(std::string_view text, std::size_t line) {
  auto t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size() || !std::isfinite(v))
    throw ParseError("non-numeric value '" + std::string(t) + "'", line);
  return v;
}

// Header row of names followed by a numeric body.
inline TabularDataset dataset_from_csv(std::string_view text, std::string provenance = {}) {
  auto rows = parse_csv(text);
  if (rows.empty()) throw ParseError("empty CSV");
  std::vector<Column> cols;
  for (const auto& h : rows[0]) cols.push_back({std::string(trim(h)), {}});
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].size() != cols.size())
      throw ParseError("expected " + std::to_string(cols.size()) + " fields, got " + std::to_string(rows[r].size()),
                       r + 1);
    for (std::size_t c = 0; c < cols.size(); ++c) cols[c].values.push_back(parse_number(rows[r][c], r + 1));
  }
  return TabularDataset(std::move(cols), std::move(provenance));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error("write failed for " + path.string());
}

inline TabularDataset load_dataset_csv(const std::filesystem::path& path) {
  return dataset_from_csv(read_file(path), path.stem().string());
}

// Shortest round-trip representation of each value.
inline std::string dataset_to_csv(const TabularDataset& ds) {
  std::string out;
  for (std::size_t c = 0; c < ds.n_columns(); ++c) {
    if (c) out += ',';
    out += csv_escape(ds.column(c).name);
  }
  out += '\n';
  char buf[64];
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    for (std::size_t c = 0; c < ds.n_columns(); ++c) {
      if (c) out += ',';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, ds.column(c).values[r]);
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

}  // namespace cattr
