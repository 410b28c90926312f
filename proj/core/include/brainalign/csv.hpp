#pragma once

#include <charconv>
#include <filesystem>
#include <string>
#include <vector>

#include "brainalign/errors.hpp"

namespace brainalign::csv {

/// Rows of a comma-separated file after an exact header match. Blank lines
/// and lines starting with '#' are skipped; quoted cells may contain commas.
std::vector<std::vector<std::string>> read(const std::filesystem::path& path,
                                           const std::vector<std::string>& expected_header);

template <typename T>
T parse_number(const std::string& s, const std::filesystem::path& path) {
  T value{};
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw FormatError(path.string() + ": bad number '" + s + "'");
  return value;
}

}  // namespace brainalign::csv
