#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fabsel/error.hpp"

namespace fabsel {

using Json = nlohmann::ordered_json;

/// Provenance carried on the first line of every line-delimited file.
struct FileHeader {
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::string config_hash;
  Json extra = Json::object();

  Json to_json() const {
    Json j;
    j["kind"] = kind;
    j["seed"] = seed ? Json(*seed) : Json(nullptr);
    j["config_hash"] = config_hash;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
  }
};

struct JsonLine {
  std::size_t line_no;
  Json value;
};

struct JsonlDocument {
  FileHeader header;
  std::vector<JsonLine> lines;
};

inline std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IOFailure("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IOFailure("cannot open " + path.string() + " for writing");
  return out;
}

inline std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOFailure("cannot open " + path.string() + " for reading");
  return in;
}

inline void write_jsonl(const std::filesystem::path& path, const FileHeader& header, const std::vector<Json>& rows) {
  auto out = open_for_write(path);
  out << header.to_json().dump() << '\n';
  for (const auto& row : rows) out << row.dump() << '\n';
  if (!out) throw IOFailure("write failed for " + path.string());
}

/// Reads a header line of the given kind followed by one JSON object per line.
/// Blank lines are skipped; line numbers are 1-based file lines.
inline JsonlDocument read_jsonl(const std::filesystem::path& path, const std::string& expected_kind) {
  auto in = open_for_read(path);
  JsonlDocument doc;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaViolation(line_no, path.filename().string() + ": " + e.what());
    }
    if (!j.is_object()) throw SchemaViolation(line_no, "expected a JSON object");
    if (!have_header) {
      if (!j.contains("kind") || j["kind"] != expected_kind)
        throw SchemaViolation(line_no, "expected header line of kind '" + expected_kind + "'");
      doc.header.kind = expected_kind;
      if (j.contains("seed") && !j["seed"].is_null()) doc.header.seed = j["seed"].get<std::uint64_t>();
      if (j.contains("config_hash")) doc.header.config_hash = j["config_hash"].get<std::string>();
      for (const auto& [k, v] : j.items())
        if (k != "kind" && k != "seed" && k != "config_hash") doc.header.extra[k] = v;
      have_header = true;
      continue;
    }
    doc.lines.push_back({line_no, std::move(j)});
  }
  if (!have_header) throw SchemaViolation(line_no == 0 ? 1 : line_no, "missing header line");
  return doc;
}

/// Typed field access that reports the offending line.
template <typename T>
T field(const JsonLine& row, const char* key) {
  if (!row.value.contains(key)) throw SchemaViolation(row.line_no, std::string("missing field '") + key + "'");
  try {
    return row.value.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(row.line_no, std::string("field '") + key + "': " + e.what());
  }
}

}  // namespace fabsel
