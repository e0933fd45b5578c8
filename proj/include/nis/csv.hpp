#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace nis::csv {

/// Shortest round-trip-safe text for a real: 17 significant digits, '.' decimal.
std::string real(double value);

/// Writes one comma-separated record terminated by LF. Fields that contain a
/// comma, quote or newline are quoted.
void write_row(std::ostream& os, const std::vector<std::string>& fields);
void write_row(std::ostream& os, std::initializer_list<std::string_view> fields);

}  // namespace nis::csv
