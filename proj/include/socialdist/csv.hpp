#pragma once

// Minimal RFC 4180-style CSV reading and writing: UTF-8, comma delimiter,
// double-quoted fields, '.' decimal separator.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace socialdist::csv {

struct Row {
  std::size_t line = 0;  // 1-based line number in the source file
  std::vector<std::string> fields;
};

class Table {
 public:
  Table() = default;
  Table(std::string source, std::vector<std::string> header, std::vector<Row> rows);

  const std::string& source() const { return source_; }
  const std::vector<std::string>& header() const { return header_; }
  const std::vector<Row>& rows() const { return rows_; }

  /// Column index for `name`, matched after trimming and case-folding.
  std::optional<std::size_t> column(std::string_view name) const;

  /// Throws ParseError naming the header line when the column is absent.
  std::size_t require_column(std::string_view name) const;

  /// Field text, or empty when the row is short.
  std::string_view field(const Row& row, std::size_t column) const;

  double number(const Row& row, std::size_t column) const;
  std::optional<double> optional_number(const Row& row, std::optional<std::size_t> column) const;
  long integer(const Row& row, std::size_t column) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<Row> rows_;
};

Table parse(std::string_view text, std::string source = "<memory>");
Table read_file(const std::filesystem::path& path);

std::string escape(std::string_view field);

/// Shortest round-trip decimal form of `value`.
std::string format_number(double value);

class Writer {
 public:
  explicit Writer(std::vector<std::string> header);
  void add_row(std::vector<std::string> fields);
  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace socialdist::csv
