#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace livqual {

/// Splits one line of a plain CSV file (no quoting) into fields.
std::vector<std::string> split_csv_line(std::string_view line);

/// Nine significant digits, the precision of every CSV this toolkit writes.
std::string format_csv_double(double value);

} // namespace livqual
