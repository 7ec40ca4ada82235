#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flowembed {

std::string read_text_file(const std::filesystem::path& path);
/// Creates parent directories as needed. Throws IoError naming the path.
void write_text_file(const std::filesystem::path& path, const std::string& content);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;

  std::optional<std::size_t> find_column(std::string_view name) const;
  /// Throws MissingColumn.
  std::size_t column(std::string_view name) const;
};

/// RFC-4180 style parsing: quoted fields, doubled quotes, CRLF, optional BOM.
/// The first record is the header; blank lines are skipped.
CsvTable parse_csv(const std::string& text);

std::string csv_escape(std::string_view field);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_integer(std::string_view text);

std::string_view trim(std::string_view text);

}  // namespace flowembed
