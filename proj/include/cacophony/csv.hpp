#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cacophony {

/// Shortest round-trip decimal rendering.
std::string format_number(double v);

/// Empty field for an absent value.
std::string format_optional(const std::optional<double>& v);

/// Minimal reader for the unquoted, comma-separated tables this tool writes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws std::runtime_error naming the missing column.
  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',');

}  // namespace cacophony
