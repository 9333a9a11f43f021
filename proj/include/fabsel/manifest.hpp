#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "fabsel/fabric.hpp"
#include "fabsel/jsonl.hpp"
#include "fabsel/util.hpp"

namespace fabsel {

// Manifest format (JSON Lines).
//
// Line 1:  {"kind":"fabsel-manifest","seed":7,"config_hash":"...","n_records":220}
// Line 2+: one fabric per line
//   {"fabric_id":"F0001","position":[x,y,z],"image_ref":"images/F0001.png",
//    "attributes":{"elasticity":2,"softness":0,"thickness":1,"texture":2},
//    "latent":{"stiffness":..,"thickness_mm":..,"roughness":..,"elasticity_coeff":..} | null,
//    "sessions":[{"press_index":1,"rate_hz":25,"file":"sessions/F0001_p1.csv"}, ...]}
//
// Session files hold both streams of one press, paths relative to the manifest:
//   stream,t_ms,force_g,frame_uri,f0,...,f15
//   P,0,12.5,,,...         pressure rows
//   G,0,,,0.013,...        GelSight frame rows

inline constexpr std::string_view kManifestKind = "fabsel-manifest";

namespace manifest_detail {

inline std::string session_file_name(const std::string& fabric_id, int press_index) {
  return "sessions/" + fabric_id + "_p" + std::to_string(press_index) + ".csv";
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return cells;
}

inline std::size_t feature_dim(const PressSession& s) {
  std::size_t dim = s.frames.empty() ? 0 : s.frames.front().features.size();
  for (const auto& f : s.frames) {
    if (f.features.size() != dim) throw InvalidRecord("frames in one press must share the feature dimension");
    if (f.uri.find_first_of(",\n\r") != std::string::npos) throw InvalidRecord("frame_uri may not contain commas");
  }
  return dim;
}

inline void write_session(const std::filesystem::path& path, const PressSession& s) {
  const std::size_t dim = feature_dim(s);
  auto out = open_for_write(path);
  out << "stream,t_ms,force_g,frame_uri";
  for (std::size_t k = 0; k < dim; ++k) out << ",f" << k;
  out << '\n';
  const std::string empty_features(dim, ',');
  for (const auto& p : s.pressure) out << "P," << p.t_ms << ',' << format_double(p.force_g) << ',' << empty_features << '\n';
  for (const auto& f : s.frames) {
    out << "G," << f.t_ms << ",," << f.uri;
    for (double v : f.features) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) throw IOFailure("write failed for " + path.string());
}

inline void read_session(const std::filesystem::path& path, PressSession& s) {
  auto in = open_for_read(path);
  const std::string where = path.filename().string() + ": ";
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv(line);
    if (!have_header) {
      if (cells.size() < 4 || cells[0] != "stream" || cells[1] != "t_ms" || cells[2] != "force_g" ||
          cells[3] != "frame_uri")
        throw SchemaViolation(line_no, where + "bad session header");
      dim = cells.size() - 4;
      for (std::size_t k = 0; k < dim; ++k)
        if (cells[4 + k] != "f" + std::to_string(k)) throw SchemaViolation(line_no, where + "bad feature column name");
      have_header = true;
      continue;
    }
    if (cells.size() != dim + 4) throw SchemaViolation(line_no, where + "wrong column count");
    try {
      const auto t = parse_int<Millis>(cells[1]);
      if (cells[0] == "P") {
        s.pressure.push_back(PressureSample{t, parse_double(cells[2])});
      } else if (cells[0] == "G") {
        GelSightFrameRef f;
        f.t_ms = t;
        f.uri = std::string(cells[3]);
        f.features.reserve(dim);
        for (std::size_t k = 0; k < dim; ++k) f.features.push_back(parse_double(cells[4 + k]));
        s.frames.push_back(std::move(f));
      } else {
        throw SchemaViolation(line_no, where + "stream must be P or G");
      }
    } catch (const InvalidRecord& e) {
      throw SchemaViolation(line_no, where + e.what());
    }
  }
  if (!have_header) throw SchemaViolation(1, where + "missing header");
}

inline Json record_to_json(const FabricRecord& r) {
  Json j;
  j["fabric_id"] = r.fabric_id;
  j["position"] = {r.position[0], r.position[1], r.position[2]};
  j["image_ref"] = r.image_ref;
  Json attrs = Json::object();
  for (auto p : kAllProperties) attrs[std::string(to_string(p))] = static_cast<int>(r.attributes[p]);
  j["attributes"] = attrs;
  if (r.latent) {
    j["latent"] = {{"stiffness", r.latent->stiffness},
                   {"thickness_mm", r.latent->thickness_mm},
                   {"roughness", r.latent->roughness},
                   {"elasticity_coeff", r.latent->elasticity_coeff}};
  } else {
    j["latent"] = nullptr;
  }
  Json sessions = Json::array();
  for (const auto& s : r.sessions)
    sessions.push_back(
        {{"press_index", s.press_index}, {"rate_hz", s.rate_hz}, {"file", session_file_name(r.fabric_id, s.press_index)}});
  j["sessions"] = sessions;
  return j;
}

inline FabricRecord record_from_json(const JsonLine& row, const std::filesystem::path& base_dir, bool load_sessions) {
  FabricRecord r;
  r.fabric_id = field<std::string>(row, "fabric_id");
  auto pos = field<std::vector<double>>(row, "position");
  if (pos.size() != 3) throw SchemaViolation(row.line_no, "position must have 3 components");
  r.position = {pos[0], pos[1], pos[2]};
  r.image_ref = field<std::string>(row, "image_ref");
  auto attrs = field<Json>(row, "attributes");
  try {
    for (auto p : kAllProperties) r.attributes.set(p, attrs.at(std::string(to_string(p))).get<int>());
  } catch (const std::exception& e) {
    throw SchemaViolation(row.line_no, std::string("attributes: ") + e.what());
  }
  if (row.value.contains("latent") && !row.value["latent"].is_null()) {
    const auto& l = row.value["latent"];
    try {
      r.latent = LatentPhysical{l.at("stiffness").get<double>(), l.at("thickness_mm").get<double>(),
                                l.at("roughness").get<double>(), l.at("elasticity_coeff").get<double>()};
    } catch (const nlohmann::json::exception& e) {
      throw SchemaViolation(row.line_no, std::string("latent: ") + e.what());
    }
  }
  for (const auto& sj : field<Json>(row, "sessions")) {
    PressSession s;
    try {
      s.press_index = sj.at("press_index").get<int>();
      s.rate_hz = sj.at("rate_hz").get<double>();
      if (load_sessions) read_session(base_dir / sj.at("file").get<std::string>(), s);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaViolation(row.line_no, std::string("sessions: ") + e.what());
    }
    r.sessions.push_back(std::move(s));
  }
  try {
    validate(r);
  } catch (const InvalidRecord& e) {
    throw SchemaViolation(row.line_no, e.what());
  }
  return r;
}

}  // namespace manifest_detail

struct ManifestInfo {
  std::optional<std::uint64_t> seed;
  std::string config_hash;
};

/// Writes the manifest and one session file per press next to it.
inline void save_manifest(const std::vector<FabricRecord>& records, const std::filesystem::path& path,
                          const ManifestInfo& info = {}) {
  std::unordered_set<std::string> seen;
  std::vector<Json> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    validate(r);
    if (!seen.insert(r.fabric_id).second) throw DuplicateFabricId(r.fabric_id);
    for (std::size_t i = 0; i < r.sessions.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (r.sessions[i].press_index == r.sessions[j].press_index)
          throw InvalidRecord("fabric " + r.fabric_id + " has two sessions with the same press_index");
    rows.push_back(manifest_detail::record_to_json(r));
  }
  const auto base = path.parent_path();
  for (const auto& r : records)
    for (const auto& s : r.sessions)
      manifest_detail::write_session(base / manifest_detail::session_file_name(r.fabric_id, s.press_index), s);

  FileHeader header{std::string(kManifestKind), info.seed, info.config_hash, Json::object()};
  header.extra["n_records"] = records.size();
  write_jsonl(path, header, rows);
}

/// Loads a manifest. With load_sessions = false only session metadata is read (no samples).
inline std::vector<FabricRecord> load_manifest(const std::filesystem::path& path, ManifestInfo* info = nullptr,
                                               bool load_sessions = true) {
  auto doc = read_jsonl(path, std::string(kManifestKind));
  if (info) *info = ManifestInfo{doc.header.seed, doc.header.config_hash};
  std::vector<FabricRecord> out;
  out.reserve(doc.lines.size());
  std::unordered_set<std::string> seen;
  const auto base = path.parent_path();
  for (const auto& row : doc.lines) {
    auto rec = manifest_detail::record_from_json(row, base, load_sessions);
    if (!seen.insert(rec.fabric_id).second)
      throw DuplicateFabricId(rec.fabric_id + " (line " + std::to_string(row.line_no) + ")");
    out.push_back(std::move(rec));
  }
  return out;
}

}  // namespace fabsel
