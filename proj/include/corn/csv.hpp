#pragma once

// Minimal CSV helpers for the toolkit's flat, unquoted formats.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace corn::csv {

/// Reads `path`, checks the header equals `expected_header`, and calls `row`
/// with the split fields and the 1-based line number of every non-empty line.
void read(const std::filesystem::path& path, std::string_view expected_header,
          const std::function<void(const std::vector<std::string>&, std::size_t)>& row);

std::vector<std::string> split(std::string_view line, char sep = ',');

std::int64_t parse_int(std::string_view field, std::size_t line);
double parse_double(std::string_view field, std::size_t line);

/// Shortest round-trip decimal representation; stable across runs.
std::string format_double(double v);

std::ofstream open_for_write(const std::filesystem::path& path);

}  // namespace corn::csv
