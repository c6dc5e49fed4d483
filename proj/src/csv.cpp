#include "csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "error.hpp"

namespace biotrack::csv {

std::vector<Row> parse(std::string_view text) {
  std::vector<Row> rows;
  Row row;
  std::string field;
  std::size_t line = 1;
  row.line = 1;
  bool in_quotes = false;
  bool field_started = false;  // distinguishes an empty record from one empty field
  bool was_quoted = false;

  auto end_field = [&] {
    row.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
    was_quoted = false;
  };
  auto end_record = [&] {
    if (field_started || !row.fields.empty()) end_field();
    if (!row.fields.empty()) rows.push_back(std::move(row));
    row = Row{};
    row.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
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
    switch (c) {
      case '"':
        if (!field.empty() || was_quoted) {
          throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        was_quoted = true;
        break;
      case ',':
        field_started = true;
        end_field();
        field_started = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        ++line;
        end_record();
        break;
      case '\n':
        ++line;
        end_record();
        break;
      default:
        if (was_quoted) {
          throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": text after closing quote");
        }
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::kParse, "line " + std::to_string(row.line) + ": unterminated quoted field");
  end_record();
  return rows;
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double parse_real(std::string_view text, std::size_t line, std::string_view column) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": column " + std::string(column) +
                                       ": '" + std::string(text) + "' is not a number");
  }
  return value;
}

long long parse_integer(std::string_view text, std::size_t line, std::string_view column) {
  long long value = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) {
    // Accept integral reals such as "12.0" from foreign CSV files.
    const double d = parse_real(text, line, column);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) {
      throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": column " + std::string(column) +
                                         ": '" + std::string(text) + "' is not an integer");
    }
    return static_cast<long long>(d);
  }
  return value;
}

}  // namespace biotrack::csv
