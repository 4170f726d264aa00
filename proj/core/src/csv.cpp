#include "seqmon/csv.hpp"

#include <charconv>
#include <cstdio>
#include <istream>

namespace seqmon {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      fields.push_back(trim(line.substr(pos)));
      break;
    }
    fields.push_back(trim(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return fields;
}

bool parse_double(std::string_view field, double& out) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !field.empty();
}

}  // namespace

csv_table read_csv(std::istream& in, std::optional<bool> has_header) {
  csv_table table;
  std::string line;
  std::size_t lineno = 0;
  bool saw_first_row = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_fields(text);

    if (!saw_first_row) {
      saw_first_row = true;
      bool header_row;
      if (has_header.has_value()) {
        header_row = *has_header;
      } else {
        double ignored;
        header_row = !parse_double(fields[0], ignored);
      }
      table.columns = fields.size();
      if (header_row) {
        for (std::string_view f : fields) table.header.emplace_back(f);
        continue;
      }
    }

    if (fields.size() != table.columns)
      throw csv_error(lineno, "expected " + std::to_string(table.columns) +
                                  " columns, found " + std::to_string(fields.size()));
    for (std::string_view f : fields) {
      double v;
      if (!parse_double(f, v))
        throw csv_error(lineno, "cannot parse '" + std::string(f) + "' as a number");
      table.values.push_back(v);
    }
  }
  return table;
}

std::string format_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace seqmon
