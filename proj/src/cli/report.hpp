#pragma once

// Report plumbing for the command-line tool: number rounding, CSV tables and
// atomic file output.

#include "json.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace apm::cli {

using Json = nlohmann::ordered_json;

inline constexpr int kSignificantDigits = 15;

// Rounded to 15 significant digits; null for NaN and infinities.
Json num(double x);
Json nums(std::span<const double> xs);

// %.15g, with nan / inf / -inf spelled out.
std::string format_number(double x);

class Table {
 public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  // Throws std::logic_error when the row width does not match the header.
  void add(std::vector<std::string> cells);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  // Preamble lines are written first, each prefixed with "# ".
  std::string to_csv(std::span<const std::string> preamble = {}) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes to a sibling temporary file and renames it over path, so readers
// never see a partial file. Throws std::runtime_error on failure.
void write_atomically(const std::filesystem::path& path, std::string_view content);

}  // namespace apm::cli
