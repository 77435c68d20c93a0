#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "reliquant/error.hpp"

namespace reliquant::text {

struct Token {
  std::string text;
  std::size_t column = 1;  // 1-based
  bool quoted = false;
};

struct Line {
  std::size_t number = 1;  // 1-based
  std::size_t indent = 0;  // leading whitespace characters
  std::vector<Token> tokens;
};

/// Splits a document into non-blank lines of whitespace-separated tokens.
/// `#` starts a comment outside double quotes; a quoted run becomes one
/// token with `quoted` set. Quotes have no escapes.
inline std::vector<Line> tokenize(std::string_view document) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  while (pos <= document.size()) {
    const auto eol = document.find('\n', pos);
    std::string_view raw = document.substr(
        pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? document.size() + 1 : eol + 1;
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);

    Line line;
    line.number = number;
    while (line.indent < raw.size() && (raw[line.indent] == ' ' || raw[line.indent] == '\t')) {
      ++line.indent;
    }
    std::size_t i = 0;
    while (i < raw.size()) {
      const char c = raw[i];
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (c == '#') break;
      Token tok;
      tok.column = i + 1;
      if (c == '"') {
        const auto close = raw.find('"', i + 1);
        if (close == std::string_view::npos) {
          throw ParseError("unterminated quoted string", number, i + 1);
        }
        tok.text = std::string(raw.substr(i + 1, close - i - 1));
        tok.quoted = true;
        i = close + 1;
      } else {
        const auto start = i;
        while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t' && raw[i] != '#') ++i;
        tok.text = std::string(raw.substr(start, i - start));
      }
      line.tokens.push_back(std::move(tok));
    }
    if (!line.tokens.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

/// Identifier tokens: letters, digits, `_`, `-`, `.`, `:`.
inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (const char c : s) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && c != '_' && c != '-' && c != '.' && c != ':') return false;
  }
  return true;
}

template <typename Int>
std::optional<Int> parse_int(std::string_view s) {
  Int value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto at = s.find(sep, start);
    parts.emplace_back(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return parts;
}

/// Backslash escaping for cells of tab- and comma-separated records.
inline std::string escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (const char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case ',': out += "\\c"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::optional<std::string> unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\') {
      out += s[i];
      continue;
    }
    if (++i == s.size()) return std::nullopt;
    switch (s[i]) {
      case '\\': out += '\\'; break;
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case 'r': out += '\r'; break;
      case 'c': out += ','; break;
      default: return std::nullopt;
    }
  }
  return out;
}

/// 64-bit FNV-1a; used for domain digests in reports.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace reliquant::text
