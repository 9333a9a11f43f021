#pragma once

#include <algorithm>
#include <cctype>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "fabsel/comparator.hpp"
#include "fabsel/error.hpp"
#include "fabsel/fabric.hpp"
#include "fabsel/jsonl.hpp"
#include "fabsel/sync.hpp"
#include "fabsel/util.hpp"

namespace fabsel {

inline constexpr std::size_t kEvidenceFrames = 4;

/// What a model sees of one fabric: its image, four sequential GelSight frames and the force
/// measured at each of those frames.
struct FabricEvidence {
  std::string image_ref;
  std::vector<std::vector<double>> gelsight;
  std::vector<double> forces;

  friend bool operator==(const FabricEvidence&, const FabricEvidence&) = default;
};

/// Evidence from the first press: frames at 1/5, 2/5, 3/5 and 4/5 of the press, each paired
/// with its synchronized force reading.
inline FabricEvidence build_evidence(const FabricRecord& record, Millis tol_ms = kDefaultAlignToleranceMs) {
  if (record.sessions.empty()) throw InvalidRecord("fabric " + record.fabric_id + " has no press sessions");
  const auto first = std::min_element(record.sessions.begin(), record.sessions.end(),
                                      [](const auto& a, const auto& b) { return a.press_index < b.press_index; });
  const auto labeled = synchronize_press(*first, tol_ms);
  if (labeled.size() < kEvidenceFrames)
    throw InvalidRecord("fabric " + record.fabric_id + " press has fewer than 4 frames");
  FabricEvidence ev;
  ev.image_ref = record.image_ref;
  for (std::size_t k = 0; k < kEvidenceFrames; ++k) {
    const auto& f = labeled[labeled.size() * (k + 1) / (kEvidenceFrames + 1)];
    ev.gelsight.push_back(f.frame.features);
    ev.forces.push_back(f.force_g);
  }
  return ev;
}

struct InstructionTemplate {
  std::string template_id;
  std::string text;
};

inline constexpr std::string_view kAbstainClause =
    " If the two fabrics cannot be reliably distinguished on this property, answer 'ANSWER: INCONCLUSIVE'.";

/// Placeholders: {property} {evidence_a} {evidence_b} {abstain_clause}
inline const InstructionTemplate& default_instruction() {
  static const InstructionTemplate tmpl{
      "pairwise-v1",
      "You are comparing two fabric samples, A and B, on the property: {property}.\n"
      "Each sample comes with an RGB image, four sequential GelSight tactile frames, and the normal "
      "contact force in grams measured at each frame.\n"
      "Fabric A: {evidence_a}\n"
      "Fabric B: {evidence_b}\n"
      "Which fabric has the higher {property}?{abstain_clause}\n"
      "Reply with a first line 'ANSWER: A' or 'ANSWER: B', optionally followed by a short rationale."};
  return tmpl;
}

struct ComparisonInput {
  std::string task_id;
  PropertyKind property = PropertyKind::elasticity;
  FabricEvidence side_a;
  FabricEvidence side_b;
  InstructionTemplate instruction = default_instruction();
  bool abstain_allowed = true;
};

inline void validate(const ComparisonInput& in) {
  for (const auto* side : {&in.side_a, &in.side_b}) {
    if (side->gelsight.size() != kEvidenceFrames || side->forces.size() != kEvidenceFrames)
      throw InvalidRecord("evidence must carry exactly 4 GelSight frames and 4 forces");
  }
  const auto dim = in.side_a.gelsight.front().size();
  for (const auto* side : {&in.side_a, &in.side_b})
    for (const auto& frame : side->gelsight)
      if (frame.size() != dim) throw InvalidRecord("GelSight descriptors differ in dimension between sides");
}

namespace prompt_detail {

inline std::string describe(const FabricEvidence& ev) {
  std::string s = "image " + ev.image_ref + "; forces (g)";
  for (std::size_t i = 0; i < ev.forces.size(); ++i) s += (i ? ", " : " ") + format_double(ev.forces[i]);
  s += "; GelSight frames attached";
  return s;
}

inline Json evidence_json(const FabricEvidence& ev) {
  Json j;
  j["image_ref"] = ev.image_ref;
  j["gelsight"] = ev.gelsight;
  j["forces"] = ev.forces;
  return j;
}

}  // namespace prompt_detail

/// Substitutes {name} placeholders. Unknown names and unbalanced braces are template errors.
inline std::string render_template(std::string_view text, const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out;
  out.reserve(text.size() * 2);
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '}') throw TemplateError("stray '}' at offset " + std::to_string(i));
    if (text[i] != '{') {
      out += text[i++];
      continue;
    }
    const auto close = text.find('}', i);
    if (close == std::string_view::npos) throw TemplateError("unterminated placeholder at offset " + std::to_string(i));
    const auto name = text.substr(i + 1, close - i - 1);
    auto it = std::find_if(vars.begin(), vars.end(), [&](const auto& kv) { return kv.first == name; });
    if (it == vars.end()) throw TemplateError("unresolved placeholder {" + std::string(name) + "}");
    out += it->second;
    i = close + 1;
  }
  return out;
}

inline std::string render_instruction(const ComparisonInput& in) {
  return render_template(in.instruction.text,
                         {{"property", std::string(to_string(in.property))},
                          {"evidence_a", prompt_detail::describe(in.side_a)},
                          {"evidence_b", prompt_detail::describe(in.side_b)},
                          {"abstain_clause", in.abstain_allowed ? std::string(kAbstainClause) : std::string()}});
}

// Request body (JSON, fields in this order):
//   {"task_id", "property", "instruction", "abstain_allowed",
//    "side_a": {"image_ref", "gelsight": [4][D], "forces": [4]}, "side_b": {...}}
// Response body: {"text": "<model output>"}

inline Json request_json(const ComparisonInput& in) {
  validate(in);
  Json j;
  j["task_id"] = in.task_id;
  j["property"] = to_string(in.property);
  j["instruction"] = render_instruction(in);
  j["abstain_allowed"] = in.abstain_allowed;
  j["side_a"] = prompt_detail::evidence_json(in.side_a);
  j["side_b"] = prompt_detail::evidence_json(in.side_b);
  return j;
}

/// Serialized request body. Deterministic: equal inputs give byte-identical payloads.
inline std::string assemble_prompt(const ComparisonInput& in) { return request_json(in).dump(); }

/// Reads "ANSWER: A|B|INCONCLUSIVE" (any case) from the first non-blank line; the rest of the
/// text, trimmed, becomes the rationale.
inline ComparisonOutcome parse_response(std::string_view raw) {
  static const std::regex answer_re(R"(^answer\s*:\s*(a|b|inconclusive)$)", std::regex::icase);
  const auto body = trim(raw);
  const auto nl = body.find('\n');
  const std::string first(trim(body.substr(0, nl)));
  std::smatch m;
  if (!std::regex_match(first, m, answer_re)) throw MalformedResponse(std::string(raw));
  std::string word = m[1].str();
  std::transform(word.begin(), word.end(), word.begin(), [](unsigned char c) { return std::tolower(c); });

  ComparisonOutcome out;
  out.decision = word == "a" ? Verdict::A : word == "b" ? Verdict::B : Verdict::inconclusive;
  if (nl != std::string_view::npos) out.rationale = std::string(trim(body.substr(nl + 1)));
  return out;
}

/// The canonical wire answer for a decision (inverse of parse_response's decision channel).
inline std::string answer_line(Verdict v) {
  switch (v) {
    case Verdict::A: return "ANSWER: A";
    case Verdict::B: return "ANSWER: B";
    case Verdict::inconclusive: return "ANSWER: INCONCLUSIVE";
  }
  return {};
}

}  // namespace fabsel
