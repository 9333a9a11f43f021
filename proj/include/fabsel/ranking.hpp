#pragma once

#include <algorithm>
#include <exception>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fabsel/comparator.hpp"
#include "fabsel/parallel.hpp"

namespace fabsel {

struct PairDecision {
  ComparisonTask task;
  ComparisonOutcome outcome;

  friend bool operator==(const PairDecision&, const PairDecision&) = default;
};

/// Copeland tournament over one property: a win is worth 1, an abstention 0.5 to each side.
struct TournamentResult {
  PropertyKind property = PropertyKind::elasticity;
  std::map<std::string, double> scores;
  std::vector<std::string> order;  // score descending, then fabric_id ascending
  std::vector<PairDecision> decisions;

  friend bool operator==(const TournamentResult&, const TournamentResult&) = default;
};

/// A comparator call failed mid-tournament; decisions that did complete are kept.
class ComparatorFailure : public Error {
 public:
  ComparatorFailure(const std::string& cause, std::vector<PairDecision> partial, ErrorCategory category)
      : Error(category, "ComparatorFailure: " + cause), partial_(std::move(partial)) {}
  const std::vector<PairDecision>& partial_decisions() const noexcept { return partial_; }

 private:
  std::vector<PairDecision> partial_;
};

inline std::string ranking_task_id(PropertyKind p, const std::string& a, const std::string& b) {
  return "rank-" + std::string(to_string(p)) + "-" + a + "-" + b;
}

/// Every unordered pair once, lower fabric_id presented as side A.
inline std::vector<ComparisonTask> round_robin_schedule(std::vector<std::string> candidates, PropertyKind property) {
  std::sort(candidates.begin(), candidates.end());
  std::vector<ComparisonTask> tasks;
  tasks.reserve(candidates.size() * (candidates.size() - 1) / 2);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    for (std::size_t j = i + 1; j < candidates.size(); ++j)
      // Selection runs on fabrics outside the training protocol, hence the unseen tag.
      tasks.push_back(ComparisonTask{ranking_task_id(property, candidates[i], candidates[j]), property,
                                     candidates[i], candidates[j], SplitKind::unseen});
  return tasks;
}

/// Copeland scores and the tie-broken order from a complete decision set.
inline TournamentResult aggregate_copeland(PropertyKind property, const std::vector<std::string>& candidates,
                                           std::vector<PairDecision> decisions) {
  TournamentResult res;
  res.property = property;
  for (const auto& c : candidates) res.scores[c] = 0.0;
  for (const auto& d : decisions) {
    auto a = res.scores.find(d.task.fabric_a), b = res.scores.find(d.task.fabric_b);
    if (a == res.scores.end()) throw UnknownFabric(d.task.fabric_a);
    if (b == res.scores.end()) throw UnknownFabric(d.task.fabric_b);
    switch (d.outcome.decision) {
      case Verdict::A: a->second += 1.0; break;
      case Verdict::B: b->second += 1.0; break;
      case Verdict::inconclusive:
        a->second += 0.5;
        b->second += 0.5;
        break;
    }
  }
  for (const auto& [id, _] : res.scores) res.order.push_back(id);
  std::stable_sort(res.order.begin(), res.order.end(),
                   [&](const auto& x, const auto& y) { return res.scores.at(x) > res.scores.at(y); });
  res.decisions = std::move(decisions);
  return res;
}

struct RankOptions {
  std::size_t max_inflight = 0;  // 0: use the comparator's cap
  // Executes the schedule in a seeded random order. Results are identical either way.
  std::optional<std::uint64_t> shuffle_seed;
};

inline TournamentResult rank_by_property(const std::vector<std::string>& candidates, PropertyKind property,
                                         const Comparator& comparator, const RankOptions& opts = {}) {
  if (candidates.size() < 2) throw InsufficientFabrics("ranking needs at least 2 candidates");
  if (std::set<std::string>(candidates.begin(), candidates.end()).size() != candidates.size())
    throw InvalidRecord("repeated candidate in ranking");

  const auto schedule = round_robin_schedule(candidates, property);
  std::vector<std::size_t> exec(schedule.size());
  std::iota(exec.begin(), exec.end(), 0);
  if (opts.shuffle_seed) {
    auto eng = keyed_engine(*opts.shuffle_seed, "schedule");
    std::shuffle(exec.begin(), exec.end(), eng);
  }

  std::vector<std::optional<ComparisonOutcome>> outcomes(schedule.size());
  const auto cap = opts.max_inflight ? opts.max_inflight : comparator.max_inflight();
  auto run = parallel_for(exec.size(), cap, [&](std::size_t k) {
    const auto idx = exec[k];
    outcomes[idx] = comparator.compare(schedule[idx]);
  });

  std::vector<PairDecision> decisions;
  decisions.reserve(schedule.size());
  for (std::size_t i = 0; i < schedule.size(); ++i)
    if (outcomes[i]) decisions.push_back({schedule[i], *outcomes[i]});

  if (auto err = run.first_error()) {
    std::string cause = "unknown error";
    ErrorCategory category = ErrorCategory::data;
    try {
      std::rethrow_exception(err);
    } catch (const Error& e) {
      cause = e.what();
      category = e.category();
    } catch (const std::exception& e) {
      cause = e.what();
    }
    throw ComparatorFailure(cause, std::move(decisions), category);
  }
  return aggregate_copeland(property, candidates, std::move(decisions));
}

struct SortingAccuracy {
  double accuracy = 0.0;      // correct decisions / all pairs; abstentions count as wrong
  double abstain_rate = 0.0;  // abstentions / all pairs
  std::size_t n_pairs = 0;
};

/// Agreement of the tournament's pairwise decisions with an expert order (best first).
inline SortingAccuracy sorting_accuracy(const TournamentResult& result, const std::vector<std::string>& expert_order) {
  std::unordered_map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < expert_order.size(); ++i) rank.emplace(expert_order[i], i);
  for (const auto& [id, _] : result.scores)
    if (!rank.count(id)) throw UnknownFabric(id + " missing from expert order");

  SortingAccuracy acc;
  acc.n_pairs = result.decisions.size();
  if (acc.n_pairs == 0) return acc;
  std::size_t correct = 0, abstained = 0;
  for (const auto& d : result.decisions) {
    const auto ra = rank.at(d.task.fabric_a), rb = rank.at(d.task.fabric_b);
    switch (d.outcome.decision) {
      case Verdict::A: correct += ra < rb; break;
      case Verdict::B: correct += rb < ra; break;
      case Verdict::inconclusive: ++abstained; break;
    }
  }
  acc.accuracy = static_cast<double>(correct) / static_cast<double>(acc.n_pairs);
  acc.abstain_rate = static_cast<double>(abstained) / static_cast<double>(acc.n_pairs);
  return acc;
}

}  // namespace fabsel
