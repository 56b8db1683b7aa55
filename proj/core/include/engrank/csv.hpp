#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace engrank::csv {

// Splits one CSV record. Supports double-quoted fields with "" escapes;
// embedded newlines are not supported.
std::vector<std::string> split_record(std::string_view line);

// Quotes a field only when it contains a comma, quote or leading/trailing
// whitespace.
std::string escape_field(std::string_view field);

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Next non-empty record, or nullopt at end of stream. Strips a UTF-8 BOM
  // on the first line and a trailing '\r'.
  std::optional<std::vector<std::string>> next();

  // 1-based physical line number of the record last returned.
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

}  // namespace engrank::csv
