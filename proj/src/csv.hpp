#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biotrack::csv {

struct Row {
  std::size_t line = 0;  // 1-based line where the record starts
  std::vector<std::string> fields;
};

// RFC 4180: comma separated, CRLF or LF records, quoted fields may contain
// commas, doubled quotes and line breaks. Throws kParse with the line number.
std::vector<Row> parse(std::string_view text);

// Quotes the field when it contains a comma, quote, CR or LF.
std::string escape(std::string_view field);

// Shortest "%.9g" rendering.
std::string format_real(double value);

double parse_real(std::string_view text, std::size_t line, std::string_view column);
long long parse_integer(std::string_view text, std::size_t line, std::string_view column);

}  // namespace biotrack::csv
