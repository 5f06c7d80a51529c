#include "cacophony/csv.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>

namespace cacophony {

std::string format_number(double v) { return fmt::format("{}", v); }

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw std::runtime_error(fmt::format("missing column '{}'", name));
}

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, begin);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, pos - begin));
    begin = pos + 1;
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(fmt::format("cannot open {}", path.string()));
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    for (const auto f : split_fields(line)) fields.emplace_back(f);
    if (first) {
      table.header = std::move(fields);
      first = false;
    } else {
      if (fields.size() != table.header.size()) {
        throw std::runtime_error(
            fmt::format("{}: row has {} fields, header has {}", path.string(), fields.size(),
                        table.header.size()));
      }
      table.rows.push_back(std::move(fields));
    }
  }
  if (first) throw std::runtime_error(fmt::format("{} is empty", path.string()));
  return table;
}

}  // namespace cacophony
