#include "socialdist/csv.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "socialdist/errors.hpp"

namespace socialdist::csv {

namespace {

std::string normalize(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Table::Table(std::string source, std::vector<std::string> header, std::vector<Row> rows)
    : source_(std::move(source)), header_(std::move(header)), rows_(std::move(rows)) {}

std::optional<std::size_t> Table::column(std::string_view name) const {
  const std::string wanted = normalize(name);
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (normalize(header_[i]) == wanted) return i;
  }
  return std::nullopt;
}

std::size_t Table::require_column(std::string_view name) const {
  if (auto c = column(name)) return *c;
  throw ParseError(source_, 1, fmt::format("missing column '{}'", name));
}

std::string_view Table::field(const Row& row, std::size_t column) const {
  if (column >= row.fields.size()) return {};
  return trim(row.fields[column]);
}

double Table::number(const Row& row, std::size_t column) const {
  std::string_view text = field(row, column);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(source_, row.line,
                     fmt::format("expected a number in column '{}', got '{}'", header_.at(column), text));
  }
  return value;
}

std::optional<double> Table::optional_number(const Row& row, std::optional<std::size_t> column) const {
  if (!column || field(row, *column).empty()) return std::nullopt;
  return number(row, *column);
}

long Table::integer(const Row& row, std::size_t column) const {
  std::string_view text = field(row, column);
  long value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || ptr != text.data() + text.size()) {
    throw ParseError(source_, row.line,
                     fmt::format("expected an integer in column '{}', got '{}'", header_.at(column), text));
  }
  return value;
}

Table parse(std::string_view text, std::string source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<Row> records;
  Row current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && trim(current.fields[0]).empty();
    if (!blank) records.push_back(std::move(current));
    current = Row{};
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && trim(field).empty()) {
          field.clear();
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',':
        end_field();
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        current.line = line;
        break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) throw ParseError(source, line, "unterminated quoted field");
  if (!field.empty() || !current.fields.empty()) end_record();

  if (records.empty()) return Table(std::move(source), {}, {});
  std::vector<std::string> header;
  for (auto& h : records.front().fields) header.emplace_back(trim(h));
  records.erase(records.begin());
  return Table(std::move(source), std::move(header), std::move(records));
}

Table read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingAnnotationFile(path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_number(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

Writer::Writer(std::vector<std::string> header) : header_(std::move(header)) {}

void Writer::add_row(std::vector<std::string> fields) { rows_.push_back(std::move(fields)); }

std::string Writer::str() const {
  std::string out;
  auto emit = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out.push_back(',');
      out += escape(fields[i]);
    }
    out.push_back('\n');
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

void Writer::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << str();
}

}  // namespace socialdist::csv
