#pragma once

#include <array>
#include <chrono>
#include <cstdio>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fabsel/kv.hpp"
#include "fabsel/metrics.hpp"
#include "fabsel/pairgen.hpp"
#include "fabsel/parallel.hpp"
#include "fabsel/ranking.hpp"
#include "fabsel/selection.hpp"

namespace fabsel {

/// Results of running one comparator over one split.
struct EvalReport {
  std::string comparator;
  std::string split;
  std::optional<std::uint64_t> seed;
  std::string config_hash;
  std::uint64_t n_pairs = 0;
  std::array<ConfusionCounts, 4> counts{};
  std::array<std::optional<double>, 4> acc{};  // percent; empty when the property had no tasks
  std::optional<double> mean_acc;
  std::optional<double> sk;  // empty when nothing was decided
  double abstain_rate = 0.0;
  std::uint64_t n_abstain = 0;
  std::uint64_t n_decided = 0;
  std::uint64_t n_decided_a = 0;
  double wall_ms = 0.0;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Fills the derived fields (ACCs, mean ACC, SK, abstention rate) from the counters.
inline void finalize(EvalReport& r) {
  double sum = 0.0;
  int present = 0;
  for (auto p : kAllProperties) {
    const auto& c = r.counts[index_of(p)];
    r.acc[index_of(p)] = c.total() ? std::optional(property_acc(c)) : std::nullopt;
    if (r.acc[index_of(p)]) {
      sum += *r.acc[index_of(p)];
      ++present;
    }
  }
  r.mean_acc = present ? std::optional(sum / present) : std::nullopt;
  r.sk = r.n_decided ? std::optional(skewness_from_counts(r.n_decided_a, r.n_decided)) : std::nullopt;
  r.abstain_rate = r.n_pairs ? static_cast<double>(r.n_abstain) / static_cast<double>(r.n_pairs) : 0.0;
}

inline void accumulate(EvalReport& r, PropertyKind p, Verdict truth, Verdict decision) {
  tally(r.counts[index_of(p)], truth, decision);
  ++r.n_pairs;
  if (decision == Verdict::inconclusive) {
    ++r.n_abstain;
  } else {
    ++r.n_decided;
    r.n_decided_a += decision == Verdict::A;
  }
}

/// Evaluation stopped on a comparator error; the report covers the tasks that finished.
class EvalFailure : public Error {
 public:
  EvalFailure(const std::string& cause, EvalReport partial, ErrorCategory category)
      : Error(category, "EvalFailure: " + cause), partial_(std::move(partial)) {}
  const EvalReport& partial_report() const noexcept { return partial_; }

 private:
  EvalReport partial_;
};

struct EvalOptions {
  std::string split;
  std::optional<std::uint64_t> seed;
  std::string config_hash;
  std::size_t max_inflight = 0;  // 0: the comparator's cap
};

inline EvalReport evaluate_split(const std::vector<ComparisonTask>& tasks, const std::vector<PairLabel>& labels,
                                 const Comparator& comparator, const EvalOptions& opts = {}) {
  std::unordered_map<std::string, Verdict> truth;
  for (const auto& l : labels) truth.emplace(l.task_id, l.truth);
  for (const auto& t : tasks)
    if (!truth.count(t.task_id)) throw InvalidRecord("no label for task " + t.task_id);

  const auto start = std::chrono::steady_clock::now();
  std::vector<std::optional<Verdict>> decisions(tasks.size());
  const auto cap = opts.max_inflight ? opts.max_inflight : comparator.max_inflight();
  auto run = parallel_for(tasks.size(), cap, [&](std::size_t i) { decisions[i] = comparator.compare(tasks[i]).decision; });

  EvalReport rep;
  rep.comparator = comparator.identity();
  rep.split = opts.split;
  rep.seed = opts.seed;
  rep.config_hash = opts.config_hash;
  for (std::size_t i = 0; i < tasks.size(); ++i)
    if (decisions[i]) accumulate(rep, tasks[i].property, truth.at(tasks[i].task_id), *decisions[i]);
  finalize(rep);
  rep.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  if (auto err = run.first_error()) {
    try {
      std::rethrow_exception(err);
    } catch (const Error& e) {
      throw EvalFailure(e.what(), rep, e.category());
    } catch (const std::exception& e) {
      throw EvalFailure(e.what(), rep, ErrorCategory::data);
    }
  }
  return rep;
}

inline EvalReport evaluate_split(const std::vector<LabeledPair>& pairs, const Comparator& comparator,
                                 const EvalOptions& opts = {}) {
  std::vector<ComparisonTask> tasks;
  std::vector<PairLabel> labels;
  tasks.reserve(pairs.size());
  labels.reserve(pairs.size());
  for (const auto& lp : pairs) {
    tasks.push_back(lp.task);
    labels.push_back(lp.label);
  }
  return evaluate_split(tasks, labels, comparator, opts);
}

// Machine report: key=value lines in this order. ACC values are percentages; `na` marks an
// undefined value (no tasks for a property, or no decided predictions for sk).
//   format, comparator, split, seed, config_hash, n_pairs,
//   acc_elasticity, acc_softness, acc_thickness, acc_texture, mean_acc, sk, abstain_rate, wall_ms,
//   counts_<property>=tp,tn,fp,fn (x4), n_abstain, n_decided, n_decided_a

inline constexpr std::string_view kEvalReportFormat = "fabsel-eval-v1";

enum class ReportFormat { machine, table };

namespace report_detail {

inline std::string opt_number(const std::optional<double>& v) { return v ? format_double(*v) : "na"; }

inline std::optional<double> parse_opt_number(const std::string& s) {
  if (s == "na") return std::nullopt;
  return parse_double(s);
}

inline std::string pct_cell(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", *v);
  return buf;
}

}  // namespace report_detail

inline KeyValueDoc report_to_kv(const EvalReport& r) {
  using report_detail::opt_number;
  KeyValueDoc doc;
  doc.add("format", std::string(kEvalReportFormat));
  doc.add("comparator", r.comparator);
  doc.add("split", r.split);
  doc.add("seed", r.seed ? std::to_string(*r.seed) : "na");
  doc.add("config_hash", r.config_hash);
  doc.add("n_pairs", std::to_string(r.n_pairs));
  for (auto p : kAllProperties) doc.add("acc_" + std::string(to_string(p)), opt_number(r.acc[index_of(p)]));
  doc.add("mean_acc", opt_number(r.mean_acc));
  doc.add("sk", opt_number(r.sk));
  doc.add("abstain_rate", format_double(r.abstain_rate));
  doc.add("wall_ms", format_double(r.wall_ms));
  for (auto p : kAllProperties) {
    const auto& c = r.counts[index_of(p)];
    doc.add("counts_" + std::string(to_string(p)), std::to_string(c.tp) + "," + std::to_string(c.tn) + "," +
                                                       std::to_string(c.fp) + "," + std::to_string(c.fn));
  }
  doc.add("n_abstain", std::to_string(r.n_abstain));
  doc.add("n_decided", std::to_string(r.n_decided));
  doc.add("n_decided_a", std::to_string(r.n_decided_a));
  return doc;
}

inline EvalReport parse_report(std::string_view text) {
  const auto doc = KeyValueDoc::parse(text);
  if (doc.at("format") != kEvalReportFormat) throw SchemaViolation(1, "not an evaluation report");
  EvalReport r;
  try {
    r.comparator = doc.at("comparator");
    r.split = doc.at("split");
    if (doc.at("seed") != "na") r.seed = parse_int<std::uint64_t>(doc.at("seed"));
    r.config_hash = doc.at("config_hash");
    r.n_pairs = parse_int<std::uint64_t>(doc.at("n_pairs"));
    for (auto p : kAllProperties)
      r.acc[index_of(p)] = report_detail::parse_opt_number(doc.at("acc_" + std::string(to_string(p))));
    r.mean_acc = report_detail::parse_opt_number(doc.at("mean_acc"));
    r.sk = report_detail::parse_opt_number(doc.at("sk"));
    r.abstain_rate = parse_double(doc.at("abstain_rate"));
    r.wall_ms = parse_double(doc.at("wall_ms"));
    for (auto p : kAllProperties) {
      const auto& v = doc.at("counts_" + std::string(to_string(p)));
      std::array<std::uint64_t, 4> n{};
      std::size_t start = 0;
      for (std::size_t k = 0; k < 4; ++k) {
        auto comma = k < 3 ? v.find(',', start) : v.size();
        if (comma == std::string::npos) throw InvalidRecord("counts need four values");
        n[k] = parse_int<std::uint64_t>(std::string_view(v).substr(start, comma - start));
        start = comma + 1;
      }
      r.counts[index_of(p)] = {n[0], n[1], n[2], n[3]};
    }
    r.n_abstain = parse_int<std::uint64_t>(doc.at("n_abstain"));
    r.n_decided = parse_int<std::uint64_t>(doc.at("n_decided"));
    r.n_decided_a = parse_int<std::uint64_t>(doc.at("n_decided_a"));
  } catch (const InvalidRecord& e) {
    throw SchemaViolation(0, e.what());
  }
  return r;
}

/// Aligned text table, one row per report, columns in the order of the attribute-wise results table.
inline std::string emit_table(const std::vector<EvalReport>& reports) {
  using report_detail::pct_cell;
  const std::vector<std::string> header = {"Comparator", "Split",   "Elasticity ACC", "Thickness ACC", "Texture ACC",
                                           "Softness ACC", "mean ACC", "SK",          "Abstain",       "Pairs"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : reports) {
    char abstain[32];
    std::snprintf(abstain, sizeof(abstain), "%.3f", r.abstain_rate);
    rows.push_back({r.comparator, r.split, pct_cell(r.acc[index_of(PropertyKind::elasticity)]),
                    pct_cell(r.acc[index_of(PropertyKind::thickness)]), pct_cell(r.acc[index_of(PropertyKind::texture)]),
                    pct_cell(r.acc[index_of(PropertyKind::softness)]), pct_cell(r.mean_acc), pct_cell(r.sk), abstain,
                    std::to_string(r.n_pairs)});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += "  ";
      const auto pad = width[c] - cells[c].size();
      // first two columns left-aligned, numbers right-aligned
      out += c < 2 ? cells[c] + std::string(pad, ' ') : std::string(pad, ' ') + cells[c];
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& row : rows) out += line(row);
  return out;
}

inline std::string emit_report(const EvalReport& report, ReportFormat format) {
  return format == ReportFormat::machine ? report_to_kv(report).emit() : emit_table({report});
}

// Tournament and selection reports share the key=value form:
//   tournament: format=fabsel-tournament-v1, property, n_candidates, order=<id,...>,
//               score.<id>=<points>, decision.<task_id>=<fabric_a>,<fabric_b>,<A|B|inconclusive>
//   selection:  format=fabsel-selection-v1, scenario_id, pipeline, chosen, score.<id>,
//               rank.<property>.<tournament keys>, trace.count, trace.<k>.kind|text|refs

inline void append_tournament(KeyValueDoc& doc, const TournamentResult& t, const std::string& prefix) {
  doc.add(prefix + "property", std::string(to_string(t.property)));
  doc.add(prefix + "n_candidates", std::to_string(t.scores.size()));
  doc.add(prefix + "order", selection_detail::join(t.order, ","));
  for (const auto& [id, s] : t.scores) doc.add(prefix + "score." + id, format_double(s));
  for (const auto& d : t.decisions)
    doc.add(prefix + "decision." + d.task.task_id,
            d.task.fabric_a + "," + d.task.fabric_b + "," + std::string(to_string(d.outcome.decision)));
}

inline KeyValueDoc tournament_to_kv(const TournamentResult& t) {
  KeyValueDoc doc;
  doc.add("format", "fabsel-tournament-v1");
  append_tournament(doc, t, "");
  return doc;
}

inline KeyValueDoc selection_to_kv(const SelectionReport& rep) {
  KeyValueDoc doc;
  doc.add("format", "fabsel-selection-v1");
  doc.add("scenario_id", rep.scenario_id);
  doc.add("pipeline", rep.pipeline);
  doc.add("chosen", rep.chosen);
  for (const auto& [id, s] : rep.scores) doc.add("score." + id, format_double(s));
  for (const auto& t : rep.per_property) append_tournament(doc, t, "rank." + std::string(to_string(t.property)) + ".");
  doc.add("trace.count", std::to_string(rep.trace.steps.size()));
  for (std::size_t k = 0; k < rep.trace.steps.size(); ++k) {
    const auto& s = rep.trace.steps[k];
    const auto key = "trace." + std::to_string(k) + ".";
    doc.add(key + "kind", std::string(to_string(s.kind)));
    doc.add(key + "text", s.text);
    doc.add(key + "refs", selection_detail::join(s.refs, ","));
  }
  return doc;
}

}  // namespace fabsel
