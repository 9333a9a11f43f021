#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "fabsel/pairgen.hpp"
#include "fabsel/prompt.hpp"
#include "fabsel/remote.hpp"

namespace fabsel {

enum class ReviewStatus : std::uint8_t { raw, expert_refined };

inline constexpr std::string_view to_string(ReviewStatus s) noexcept {
  return s == ReviewStatus::raw ? "raw" : "expert_refined";
}

/// One teacher explanation for a labeled pair, generated with the expert answer in view.
struct ExplanationRecord {
  std::string task_id;
  ComparisonInput inputs;
  Verdict expert_truth = Verdict::inconclusive;
  std::string teacher_explanation;
  ReviewStatus review_status = ReviewStatus::raw;
};

inline bool operator==(const ExplanationRecord& a, const ExplanationRecord& b) {
  return a.task_id == b.task_id && a.inputs.task_id == b.inputs.task_id && a.inputs.property == b.inputs.property &&
         a.inputs.side_a == b.inputs.side_a && a.inputs.side_b == b.inputs.side_b &&
         a.inputs.instruction.template_id == b.inputs.instruction.template_id &&
         a.inputs.instruction.text == b.inputs.instruction.text &&
         a.inputs.abstain_allowed == b.inputs.abstain_allowed && a.expert_truth == b.expert_truth &&
         a.teacher_explanation == b.teacher_explanation && a.review_status == b.review_status;
}

inline ExplanationRecord build_posthoc_record(const ComparisonTask& task, const PairLabel& truth,
                                             const ComparisonInput& input, const std::string& teacher_explanation) {
  if (trim(teacher_explanation).empty()) throw EmptyExplanation("task " + task.task_id);
  if (truth.task_id != task.task_id) throw InvalidRecord("label " + truth.task_id + " does not match " + task.task_id);
  validate(input);
  return ExplanationRecord{task.task_id, input, truth.truth, teacher_explanation, ReviewStatus::raw};
}

/// Expert review pass. An optional replacement text overrides the teacher's wording.
inline void mark_refined(ExplanationRecord& rec, const std::string& refined_text = {}) {
  if (!refined_text.empty()) rec.teacher_explanation = refined_text;
  if (trim(rec.teacher_explanation).empty()) throw EmptyExplanation("task " + rec.task_id);
  rec.review_status = ReviewStatus::expert_refined;
}

/// Plain-language form of the expert ranking that accompanies a teacher request.
inline std::string expert_ranking_text(PropertyKind p, Verdict truth) {
  const std::string prop(to_string(p));
  switch (truth) {
    case Verdict::A: return "Fabric A has the higher " + prop + ".";
    case Verdict::B: return "Fabric B has the higher " + prop + ".";
    case Verdict::inconclusive: return "The fabrics cannot be distinguished on " + prop + ".";
  }
  return {};
}

/// Source of teacher explanations.
class TeacherSource {
 public:
  virtual ~TeacherSource() = default;
  virtual std::string explain(const ComparisonInput& input, Verdict truth) const = 0;
};

/// Canned explanations keyed by task_id; a "*" entry is used for tasks without their own entry.
/// Texts may use {property} and {ranking}.
class FixtureTeacher final : public TeacherSource {
 public:
  explicit FixtureTeacher(std::map<std::string, std::string> texts) : texts_(std::move(texts)) {}

  /// Fixture file: JSON Lines of {"task_id": ..., "text": ...}, no header.
  static FixtureTeacher from_file(const std::filesystem::path& path) {
    auto in = open_for_read(path);
    std::map<std::string, std::string> texts;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        auto j = Json::parse(line);
        texts[j.at("task_id").get<std::string>()] = j.at("text").get<std::string>();
      } catch (const nlohmann::json::exception& e) {
        throw SchemaViolation(line_no, path.filename().string() + ": " + e.what());
      }
    }
    return FixtureTeacher(std::move(texts));
  }

  std::string explain(const ComparisonInput& input, Verdict truth) const override {
    auto it = texts_.find(input.task_id);
    if (it == texts_.end()) it = texts_.find("*");
    if (it == texts_.end()) return {};
    return render_template(it->second, {{"property", std::string(to_string(input.property))},
                                        {"ranking", expert_ranking_text(input.property, truth)}});
  }

 private:
  std::map<std::string, std::string> texts_;
};

/// Teacher model behind the comparator wire protocol; the request also carries the expert answer.
class RemoteTeacher final : public TeacherSource {
 public:
  explicit RemoteTeacher(EndpointConfig cfg) : cfg_(std::move(cfg)) { split_url(cfg_.url); }

  std::string explain(const ComparisonInput& input, Verdict truth) const override {
    auto body = request_json(input);
    body["expert_truth"] = to_string(truth);
    body["expert_ranking"] = expert_ranking_text(input.property, truth);
    return post_for_text(cfg_, body.dump());
  }

 private:
  EndpointConfig cfg_;
};

struct DistillResult {
  std::vector<ExplanationRecord> records;
  std::size_t skipped_empty = 0;
};

/// One explanation record per labeled pair. Pairs whose teacher text is empty are skipped and counted.
inline DistillResult distill_build(const std::vector<LabeledPair>& pairs, const std::vector<FabricRecord>& fabrics,
                                   const TeacherSource& teacher, bool refine = false) {
  std::unordered_map<std::string, FabricEvidence> evidence;
  for (const auto& r : fabrics) evidence.emplace(r.fabric_id, build_evidence(r));
  auto lookup = [&](const std::string& id) -> const FabricEvidence& {
    auto it = evidence.find(id);
    if (it == evidence.end()) throw UnknownFabric(id);
    return it->second;
  };

  DistillResult out;
  for (const auto& lp : pairs) {
    ComparisonInput in;
    in.task_id = lp.task.task_id;
    in.property = lp.task.property;
    in.side_a = lookup(lp.task.fabric_a);
    in.side_b = lookup(lp.task.fabric_b);
    const auto text = teacher.explain(in, lp.label.truth);
    try {
      auto rec = build_posthoc_record(lp.task, lp.label, in, text);
      if (refine) mark_refined(rec);
      out.records.push_back(std::move(rec));
    } catch (const EmptyExplanation&) {
      ++out.skipped_empty;
    }
  }
  return out;
}

// Explanation files (JSON Lines):
//   {"kind":"fabsel-explanations","seed":..,"config_hash":..,"n_records":..,"skipped_empty":..}
//   {"task_id", "property", "instruction_template": {"template_id","text"}, "instruction",
//    "abstain_allowed", "side_a", "side_b", "expert_truth", "teacher_explanation", "review_status"}

inline constexpr std::string_view kExplanationsKind = "fabsel-explanations";

inline Json explanation_to_json(const ExplanationRecord& rec) {
  Json j;
  j["task_id"] = rec.task_id;
  j["property"] = to_string(rec.inputs.property);
  j["instruction_template"] = {{"template_id", rec.inputs.instruction.template_id},
                               {"text", rec.inputs.instruction.text}};
  j["instruction"] = render_instruction(rec.inputs);
  j["abstain_allowed"] = rec.inputs.abstain_allowed;
  j["side_a"] = prompt_detail::evidence_json(rec.inputs.side_a);
  j["side_b"] = prompt_detail::evidence_json(rec.inputs.side_b);
  j["expert_truth"] = to_string(rec.expert_truth);
  j["teacher_explanation"] = rec.teacher_explanation;
  j["review_status"] = to_string(rec.review_status);
  return j;
}

inline ExplanationRecord explanation_from_json(const JsonLine& row) {
  ExplanationRecord rec;
  try {
    const auto& j = row.value;
    rec.task_id = j.at("task_id").get<std::string>();
    rec.inputs.task_id = rec.task_id;
    rec.inputs.property = property_from_string(j.at("property").get<std::string>());
    rec.inputs.instruction.template_id = j.at("instruction_template").at("template_id").get<std::string>();
    rec.inputs.instruction.text = j.at("instruction_template").at("text").get<std::string>();
    rec.inputs.abstain_allowed = j.at("abstain_allowed").get<bool>();
    for (auto [key, side] : {std::pair{"side_a", &rec.inputs.side_a}, std::pair{"side_b", &rec.inputs.side_b}}) {
      side->image_ref = j.at(key).at("image_ref").get<std::string>();
      side->gelsight = j.at(key).at("gelsight").get<std::vector<std::vector<double>>>();
      side->forces = j.at(key).at("forces").get<std::vector<double>>();
    }
    rec.expert_truth = verdict_from_string(j.at("expert_truth").get<std::string>());
    rec.teacher_explanation = j.at("teacher_explanation").get<std::string>();
    const auto status = j.at("review_status").get<std::string>();
    if (status == "raw") {
      rec.review_status = ReviewStatus::raw;
    } else if (status == "expert_refined") {
      rec.review_status = ReviewStatus::expert_refined;
    } else {
      throw InvalidRecord("unknown review_status '" + status + "'");
    }
    validate(rec.inputs);
    if (j.at("instruction").get<std::string>() != render_instruction(rec.inputs))
      throw InvalidRecord("instruction does not match its template");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaViolation(row.line_no, e.what());
  } catch (const Error& e) {
    throw SchemaViolation(row.line_no, e.what());
  }
  if (trim(rec.teacher_explanation).empty()) throw SchemaViolation(row.line_no, "empty teacher_explanation");
  return rec;
}

inline void save_explanations(const std::filesystem::path& path, const DistillResult& result,
                              std::optional<std::uint64_t> seed, const std::string& config_hash) {
  std::vector<Json> rows;
  rows.reserve(result.records.size());
  for (const auto& r : result.records) rows.push_back(explanation_to_json(r));
  FileHeader header{std::string(kExplanationsKind), seed, config_hash, Json::object()};
  header.extra["n_records"] = result.records.size();
  header.extra["skipped_empty"] = result.skipped_empty;
  write_jsonl(path, header, rows);
}

inline std::vector<ExplanationRecord> load_explanations(const std::filesystem::path& path) {
  auto doc = read_jsonl(path, std::string(kExplanationsKind));
  std::vector<ExplanationRecord> out;
  out.reserve(doc.lines.size());
  for (const auto& row : doc.lines) out.push_back(explanation_from_json(row));
  return out;
}

}  // namespace fabsel
