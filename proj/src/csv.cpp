#include "gmclab/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace gmclab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  // Try increasing precision until the value round-trips.
  for (int p = 15; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

CsvWriter& CsvWriter::field(std::string_view s) {
  if (!first_) os_ << ',';
  first_ = false;
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    os_ << s;
  } else {
    os_ << '"';
    for (char c : s) {
      if (c == '"') os_ << '"';
      os_ << c;
    }
    os_ << '"';
  }
  return *this;
}

void CsvWriter::end_row() {
  os_ << '\n';
  first_ = true;
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  for (const auto& f : fields) field(f);
  end_row();
}

}  // namespace gmclab
