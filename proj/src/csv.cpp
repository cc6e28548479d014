#include "corn/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "corn/error.hpp"

namespace corn::csv {

namespace {

std::string_view strip(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

}  // namespace

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    out.emplace_back(strip(line.substr(pos, next == std::string_view::npos ? next : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

void read(const std::filesystem::path& path, std::string_view expected_header,
          const std::function<void(const std::vector<std::string>&, std::size_t)>& row) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = strip(line);
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (view.empty()) continue;
    if (!header_seen) {
      if (view != expected_header) {
        throw ParseError(path.filename().string() + ": expected header '" + std::string(expected_header) +
                             "', got '" + std::string(view) + "'",
                         line_no);
      }
      header_seen = true;
      continue;
    }
    row(split(view), line_no);
  }
  if (!header_seen) throw ParseError(path.filename().string() + ": missing header", 1);
}

std::int64_t parse_int(std::string_view field, std::size_t line) {
  std::int64_t v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    throw ParseError("expected integer, got '" + std::string(field) + "'", line);
  }
  return v;
}

double parse_double(std::string_view field, std::size_t line) {
  if (field == "inf" || field == "Inf" || field == "INF") return INFINITY;
  double v = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc{} || ptr != end || field.empty()) {
    throw ParseError("expected number, got '" + std::string(field) + "'", line);
  }
  return v;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

}  // namespace corn::csv
