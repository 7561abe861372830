#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace quarry::csv {

using Rows = std::vector<std::vector<std::string>>;

/// Quotes a field when it holds a comma, quote, CR or LF; quotes are doubled.
std::string escape(std::string_view field);

/// Shortest decimal form that reads back to the same double.
std::string number(double v);

/// CRLF-terminated records.
std::string write(const Rows& rows);

/// Accepts CRLF or LF line ends and quoted fields spanning lines.
Rows parse(std::string_view text);

}  // namespace quarry::csv
