#pragma once

#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fabsel/error.hpp"

namespace fabsel {

/// Ordered key=value lines. Values escape backslash, CR and LF so every entry stays on one line.
class KeyValueDoc {
 public:
  void add(std::string key, std::string value) { entries_.emplace_back(std::move(key), std::move(value)); }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : entries_)
      if (k == key) return &v;
    return nullptr;
  }

  const std::string& at(std::string_view key) const {
    if (const auto* v = find(key)) return *v;
    throw SchemaViolation(0, "missing key '" + std::string(key) + "'");
  }

  std::string emit() const {
    std::string out;
    for (const auto& [k, v] : entries_) {
      out += k;
      out += '=';
      out += escape(v);
      out += '\n';
    }
    return out;
  }

  static KeyValueDoc parse(std::string_view text) {
    KeyValueDoc doc;
    std::size_t line_no = 0, start = 0;
    while (start < text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(start, end - start);
      start = end + 1;
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos || eq == 0) throw SchemaViolation(line_no, "expected key=value");
      doc.add(std::string(line.substr(0, eq)), unescape(line.substr(eq + 1), line_no));
    }
    return doc;
  }

 private:
  static std::string escape(std::string_view v) {
    std::string out;
    out.reserve(v.size());
    for (char c : v) {
      if (c == '\\') out += "\\\\";
      else if (c == '\n') out += "\\n";
      else if (c == '\r') out += "\\r";
      else out += c;
    }
    return out;
  }

  static std::string unescape(std::string_view v, std::size_t line_no) {
    std::string out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] != '\\') {
        out += v[i];
        continue;
      }
      if (++i == v.size()) throw SchemaViolation(line_no, "dangling escape");
      switch (v[i]) {
        case '\\': out += '\\'; break;
        case 'n': out += '\n'; break;
        case 'r': out += '\r'; break;
        default: throw SchemaViolation(line_no, "unknown escape");
      }
    }
    return out;
  }

  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace fabsel
