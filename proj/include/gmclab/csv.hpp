#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace gmclab {

// Shortest round-trip decimal representation ("%.17g"), '.' decimal point.
std::string format_double(double v);

// Minimal RFC 4180 writer: fields containing ',', '"' or newlines are quoted.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}

  CsvWriter& field(std::string_view s);
  CsvWriter& field(double v) { return field(format_double(v)); }
  CsvWriter& field(std::int64_t v) { return field(std::to_string(v)); }
  CsvWriter& field(std::uint64_t v) { return field(std::to_string(v)); }
  CsvWriter& field(int v) { return field(std::to_string(v)); }
  void end_row();
  void row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
  bool first_ = true;
};

}  // namespace gmclab
