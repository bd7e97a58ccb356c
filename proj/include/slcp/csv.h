#pragma once

#include <string>
#include <vector>

namespace slcp {

// Shortest form that round-trips: 17 significant digits, '.' separator.
std::string FormatDouble(double value);

// One RFC 4180 record (fields quoted when they contain ',', '"' or newlines),
// terminated by "\n".
std::string CsvRecord(const std::vector<std::string>& fields);

}  // namespace slcp
