#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqmon {

class csv_error : public std::runtime_error {
 public:
  csv_error(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Numeric table: values row-major, fixed column count.
struct csv_table {
  std::vector<std::string> header;  // empty when the file has none
  std::size_t columns = 0;
  std::vector<double> values;

  std::size_t row_count() const { return columns ? values.size() / columns : 0; }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * columns, columns};
  }
};

// Comma-separated numeric input.  When has_header is unset, the first row is
// taken as a header exactly when it does not parse as numbers.  Blank lines
// are skipped; ragged or non-numeric rows raise csv_error with the line.
csv_table read_csv(std::istream& in, std::optional<bool> has_header = std::nullopt);

std::string format_g6(double v);  // printf %.6g

}  // namespace seqmon
