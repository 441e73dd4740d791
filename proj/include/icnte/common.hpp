#pragma once

#include <charconv>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace icnte {

// All library failures surface as this type (or a subclass) with a
// human-readable message suitable for a one-line CLI diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the file parsers; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct NodeId {
  std::uint32_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

struct LinkId {
  std::uint32_t value = 0;
  auto operator<=>(const LinkId&) const = default;
};

// Ordered (source, destination) demand pair.
struct NodePair {
  NodeId src;
  NodeId dst;
  auto operator<=>(const NodePair&) const = default;
};

// Canonical units: bytes, seconds, bytes/second.
inline constexpr double kBytesPerSecondPerMbps = 125000.0;

inline constexpr double mbps_to_bytes_per_second(double mbps) {
  return mbps * kBytesPerSecondPerMbps;
}

inline constexpr double bytes_per_second_to_mbps(double bps) {
  return bps / kBytesPerSecondPerMbps;
}

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

namespace text {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(s.substr(start)));
      return out;
    }
    out.push_back(trim(s.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::vector<std::string_view> lines(std::string_view s) {
  auto out = split(s, '\n');
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

// Locale-independent number parsing; accepts "inf"/"infinity".
inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return v;
}

inline std::optional<std::int64_t> parse_int(std::string_view s) {
  s = trim(s);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

// Shortest representation that round-trips exactly.
inline std::string format_double(double v) {
  char buf[512];
  const double mag = std::abs(v);
  const bool plain = v == 0.0 || (mag >= 1e-4 && mag < 1e15);
  const auto [ptr, ec] = plain ? std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed)
                               : std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// General format with a fixed number of significant digits.
inline std::string format_double(double v, int significant_digits) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v,
                                       std::chars_format::general,
                                       significant_digits);
  return std::string(buf, ptr);
}

}  // namespace text
}  // namespace icnte
