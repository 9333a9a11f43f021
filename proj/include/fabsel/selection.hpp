#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fabsel/jsonl.hpp"
#include "fabsel/ranking.hpp"

namespace fabsel {

struct ScenarioTarget {
  PropertyKind property = PropertyKind::elasticity;
  int level = 2;

  friend bool operator==(const ScenarioTarget&, const ScenarioTarget&) = default;
};

/// A selection task: desired levels on one to three properties over a candidate set.
struct Scenario {
  std::string scenario_id;
  std::string title;
  std::vector<ScenarioTarget> targets;
  std::vector<std::string> candidates;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline void validate(const Scenario& s) {
  if (s.targets.empty() || s.targets.size() > 3) throw InvalidScenario(s.scenario_id + ": needs 1-3 targets");
  if (s.candidates.size() < 2) throw InvalidScenario(s.scenario_id + ": needs at least 2 candidates");
  std::set<PropertyKind> props;
  for (const auto& t : s.targets) {
    if (!valid_level(t.level)) throw InvalidScenario(s.scenario_id + ": target level outside {0,1,2}");
    if (!props.insert(t.property).second) throw InvalidScenario(s.scenario_id + ": repeated target property");
  }
  if (std::set<std::string>(s.candidates.begin(), s.candidates.end()).size() != s.candidates.size())
    throw InvalidScenario(s.scenario_id + ": repeated candidate");
}

enum class StepKind : std::uint8_t { compare, rank, aggregate, decide };

inline constexpr std::string_view to_string(StepKind k) noexcept {
  switch (k) {
    case StepKind::compare: return "compare";
    case StepKind::rank: return "rank";
    case StepKind::aggregate: return "aggregate";
    case StepKind::decide: return "decide";
  }
  return "?";
}

struct TraceStep {
  StepKind kind = StepKind::compare;
  std::string text;
  std::vector<std::string> refs;  // task IDs or fabric IDs the step consumed
};

struct ReasoningTrace {
  std::vector<TraceStep> steps;
};

struct SelectionReport {
  std::string scenario_id;
  std::string chosen;
  std::string pipeline;  // "comparator" or "symbolic"
  std::vector<TournamentResult> per_property;
  std::map<std::string, double> scores;
  ReasoningTrace trace;
};

/// How well a rank position fits a target level, with 0 the top (highest-level) position.
/// Positions may be fractional when candidates share a score.
inline double position_score(int target_level, double position, std::size_t n) {
  const double p = position, last = static_cast<double>(n - 1);
  switch (target_level) {
    case 2: return (last - p) / last;
    case 0: return p / last;
    default:
      if (n == 2) return 0.5;
      return 1.0 - std::abs(p - last / 2.0) / (last / 2.0);
  }
}

/// Rank positions of a tournament order. Candidates with equal Copeland scores share the mean of
/// the positions they occupy, so indistinguishable fabrics score alike.
inline std::unordered_map<std::string, double> tied_positions(const TournamentResult& r) {
  std::unordered_map<std::string, double> pos;
  for (std::size_t i = 0; i < r.order.size();) {
    std::size_t j = i;
    while (j + 1 < r.order.size() && r.scores.at(r.order[j + 1]) == r.scores.at(r.order[i])) ++j;
    const double mean = static_cast<double>(i + j) / 2.0;
    for (std::size_t k = i; k <= j; ++k) pos.emplace(r.order[k], mean);
    i = j + 1;
  }
  return pos;
}

/// Mean position score across the scenario's targets, per candidate.
inline std::map<std::string, double> score_candidates(const Scenario& scenario,
                                                      const std::vector<TournamentResult>& per_property) {
  validate(scenario);
  const std::size_t n = scenario.candidates.size();
  std::map<std::string, double> scores;
  for (const auto& c : scenario.candidates) scores[c] = 0.0;
  for (const auto& target : scenario.targets) {
    auto it = std::find_if(per_property.begin(), per_property.end(),
                           [&](const auto& r) { return r.property == target.property; });
    if (it == per_property.end()) throw MissingRanking(std::string(to_string(target.property)));
    if (it->order.size() != n || it->scores.size() != n)
      throw MissingRanking(std::string(to_string(target.property)) + " ranks a different set");
    const auto pos = tied_positions(*it);
    for (const auto& c : scenario.candidates) {
      auto p = pos.find(c);
      if (p == pos.end()) throw MissingRanking(std::string(to_string(target.property)) + " lacks " + c);
      scores[c] += position_score(target.level, p->second, n);
    }
  }
  for (auto& [_, s] : scores) s /= static_cast<double>(scenario.targets.size());
  return scores;
}

namespace selection_detail {

/// Highest score, ties to the smallest fabric_id (std::map iterates in id order).
inline std::string argmax(const std::map<std::string, double>& scores, std::size_t* n_tied = nullptr) {
  auto best = scores.begin();
  for (auto it = scores.begin(); it != scores.end(); ++it)
    if (it->second > best->second) best = it;
  if (n_tied)
    *n_tied = static_cast<std::size_t>(
        std::count_if(scores.begin(), scores.end(), [&](const auto& kv) { return kv.second == best->second; }));
  return best->first;
}

inline std::string target_text(const Scenario& s) {
  std::string out;
  for (const auto& t : s.targets) {
    if (!out.empty()) out += ", ";
    out += std::string(to_string(t.property)) + " (" + std::to_string(t.level) + ")";
  }
  return out;
}

inline std::string join(const std::vector<std::string>& v, const char* sep = ", ") {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : sep) + s;
  return out;
}

inline std::string scores_text(const std::map<std::string, double>& scores) {
  std::string out;
  for (const auto& [id, s] : scores) out += (out.empty() ? "" : ", ") + id + "=" + format_double(s);
  return out;
}

inline void add_decide_step(SelectionReport& rep) {
  std::size_t tied = 0;
  rep.chosen = argmax(rep.scores, &tied);
  std::string text = "choose " + rep.chosen + " with score " + format_double(rep.scores.at(rep.chosen));
  if (tied > 1) text += " (tie among " + std::to_string(tied) + " candidates, broken by lowest fabric_id)";
  rep.trace.steps.push_back({StepKind::decide, std::move(text), {rep.chosen}});
}

}  // namespace selection_detail

/// Ranks the candidates on every target property through the comparator, scores rank
/// positions against the targets and picks the best candidate, recording each step.
inline SelectionReport select_fabric(const Scenario& scenario, const Comparator& comparator,
                                     const RankOptions& opts = {}) {
  validate(scenario);
  SelectionReport rep;
  rep.scenario_id = scenario.scenario_id;
  rep.pipeline = "comparator";
  for (const auto& target : scenario.targets) {
    auto result = rank_by_property(scenario.candidates, target.property, comparator, opts);
    for (const auto& d : result.decisions) {
      const auto winner = d.outcome.decision == Verdict::A   ? d.task.fabric_a
                          : d.outcome.decision == Verdict::B ? d.task.fabric_b
                                                             : std::string("neither");
      rep.trace.steps.push_back({StepKind::compare,
                                 std::string(to_string(target.property)) + ": " + d.task.fabric_a + " vs " +
                                     d.task.fabric_b + " -> " + winner,
                                 {d.task.task_id}});
    }
    rep.trace.steps.push_back({StepKind::rank,
                               std::string(to_string(target.property)) + " order: " +
                                   selection_detail::join(result.order, " > ") + " (Copeland " +
                                   selection_detail::scores_text(result.scores) + ")",
                               result.order});
    rep.per_property.push_back(std::move(result));
  }
  rep.scores = score_candidates(scenario, rep.per_property);
  rep.trace.steps.push_back({StepKind::aggregate,
                             "mean position score over " + selection_detail::target_text(scenario) + ": " +
                                 selection_detail::scores_text(rep.scores),
                             scenario.candidates});
  selection_detail::add_decide_step(rep);
  return rep;
}

struct SymbolicPrediction {
  std::string fabric_id;
  AttributeVector predicted;
};

/// Selection from predicted symbolic levels. The score is 1 - sum|predicted - target| / (2 * #targets),
/// an order-preserving rescaling of the negative level distance into [0, 1].
inline SelectionReport it_pipeline_select(const Scenario& scenario, const std::vector<SymbolicPrediction>& predictions) {
  validate(scenario);
  std::unordered_map<std::string, AttributeVector> pred;
  for (const auto& p : predictions) pred.emplace(p.fabric_id, p.predicted);

  SelectionReport rep;
  rep.scenario_id = scenario.scenario_id;
  rep.pipeline = "symbolic";
  std::vector<std::string> level_lines;
  for (const auto& c : scenario.candidates) {
    auto it = pred.find(c);
    if (it == pred.end()) throw MissingPrediction(c);
    int distance = 0;
    for (const auto& t : scenario.targets) distance += std::abs(static_cast<int>(it->second[t.property]) - t.level);
    rep.scores[c] = 1.0 - static_cast<double>(distance) / (2.0 * static_cast<double>(scenario.targets.size()));
    std::string line = c + " predicted";
    for (const auto& t : scenario.targets)
      line += " " + std::string(to_string(t.property)) + "=" + std::to_string(it->second[t.property]);
    line += " (distance " + std::to_string(distance) + ")";
    level_lines.push_back(std::move(line));
  }
  rep.trace.steps.push_back({StepKind::aggregate,
                             "symbolic levels against " + selection_detail::target_text(scenario) + ": " +
                                 selection_detail::join(level_lines, "; "),
                             scenario.candidates});
  selection_detail::add_decide_step(rep);
  return rep;
}

/// Predicts each level correctly with probability `accuracy`, otherwise one of the two wrong
/// levels uniformly. Stands in for a learned level classifier.
inline AttributeVector noisy_levels(const AttributeVector& truth, double accuracy, std::mt19937_64& eng) {
  AttributeVector out = truth;
  for (auto p : kAllProperties) {
    if (unit_draw(eng) < accuracy) continue;
    const int shift = unit_draw(eng) < 0.5 ? 1 : 2;
    out.set(p, (truth[p] + shift) % 3);
  }
  return out;
}

// Scenario files: one JSON object per file
//   {"scenario_id":"S01","title":"...","targets":[{"property":"elasticity","level":2},...],
//    "candidates":["C0101","C0102",...]}

inline Scenario scenario_from_json(const Json& j) {
  Scenario s;
  try {
    s.scenario_id = j.at("scenario_id").get<std::string>();
    s.title = j.at("title").get<std::string>();
    for (const auto& t : j.at("targets"))
      s.targets.push_back({property_from_string(t.at("property").get<std::string>()), t.at("level").get<int>()});
    s.candidates = j.at("candidates").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InvalidScenario(e.what());
  } catch (const InvalidRecord& e) {
    throw InvalidScenario(e.what());
  }
  validate(s);
  return s;
}

inline Json scenario_to_json(const Scenario& s) {
  Json j;
  j["scenario_id"] = s.scenario_id;
  j["title"] = s.title;
  j["targets"] = Json::array();
  for (const auto& t : s.targets) j["targets"].push_back({{"property", to_string(t.property)}, {"level", t.level}});
  j["candidates"] = s.candidates;
  return j;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidScenario(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const std::filesystem::path& path, const Scenario& s) {
  validate(s);
  auto out = open_for_write(path);
  out << scenario_to_json(s).dump(2) << '\n';
}

}  // namespace fabsel
