#pragma once

#include <string>
#include <vector>

#include "errors.hpp"

namespace mfdp {

// Reads one numeric column from a CSV or TSV file (delimiter auto-detected
// from the first row, header auto-detected by whether every first-row cell
// parses as a number). `column` may be empty (sole column required), a header
// name, or a 1-based index. Parse failures carry line numbers.
std::vector<double> read_numeric_column(const std::string& path, const std::string& column);

}  // namespace mfdp
