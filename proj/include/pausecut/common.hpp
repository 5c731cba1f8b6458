#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace pausecut {

// All machine-readable reports and schemas use insertion-ordered JSON so
// emitted bytes are stable run to run.
using json = nlohmann::ordered_json;

// Base class for everything this library throws on bad input or bad state.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file or stream; carries a 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// An invariant of a domain type or an operation precondition was violated.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Stream/file failure while reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Tokens are maximal non-whitespace runs of the UTF-8 text.
inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

inline std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

// FNV-1a, 64 bit. Stable across platforms; used wherever a documented
// deterministic string hash is needed (e.g. the mock synthesizer's tone table).
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Shortest decimal form that parses back to exactly the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::size_t line = 0) {
  auto t = trim(s);
  double v{};
  auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size())
    throw ParseError("expected a number, got '" + std::string(t) + "'", line);
  return v;
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace pausecut
