#include "nis/csv.hpp"

#include <cstdio>

namespace nis::csv {
namespace {

void write_field(std::ostream& os, std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) {
    os << field;
    return;
  }
  os << '"';
  for (char c : field) {
    if (c == '"') os << '"';
    os << c;
  }
  os << '"';
}

}  // namespace

std::string real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    write_field(os, fields[i]);
  }
  os << '\n';
}

void write_row(std::ostream& os, std::initializer_list<std::string_view> fields) {
  bool first = true;
  for (auto f : fields) {
    if (!first) os << ',';
    write_field(os, f);
    first = false;
  }
  os << '\n';
}

}  // namespace nis::csv
