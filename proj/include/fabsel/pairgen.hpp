#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "fabsel/fabric.hpp"
#include "fabsel/jsonl.hpp"
#include "fabsel/property.hpp"
#include "fabsel/util.hpp"

namespace fabsel {

enum class SplitKind : std::uint8_t { train, val, fine_grained, unseen, duplicate };

inline constexpr std::array<SplitKind, 5> kAllSplits = {SplitKind::train, SplitKind::val, SplitKind::fine_grained,
                                                        SplitKind::unseen, SplitKind::duplicate};

inline constexpr std::string_view to_string(SplitKind s) noexcept {
  switch (s) {
    case SplitKind::train: return "train";
    case SplitKind::val: return "val";
    case SplitKind::fine_grained: return "fine_grained";
    case SplitKind::unseen: return "unseen";
    case SplitKind::duplicate: return "duplicate";
  }
  return "?";
}

inline std::optional<SplitKind> parse_split(std::string_view s) noexcept {
  for (auto k : kAllSplits)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

struct ComparisonTask {
  std::string task_id;
  PropertyKind property = PropertyKind::elasticity;
  std::string fabric_a;
  std::string fabric_b;
  SplitKind split = SplitKind::train;

  friend bool operator==(const ComparisonTask&, const ComparisonTask&) = default;
};

struct PairLabel {
  std::string task_id;
  Verdict truth = Verdict::inconclusive;

  friend bool operator==(const PairLabel&, const PairLabel&) = default;
};

struct LabeledPair {
  ComparisonTask task;
  PairLabel label;

  friend bool operator==(const LabeledPair&, const LabeledPair&) = default;
};

struct SplitSpec {
  std::size_t n_train_pairs = 4000;
  std::size_t n_val_pairs = 400;
  std::size_t n_unseen_fabrics = 20;
  // Extreme pairs each attribute must yield inside the unseen split; 0 disables the constraint.
  std::size_t unseen_pairs_per_attribute = 35;
  std::size_t n_duplicate_pairs = 50;
  std::uint64_t seed = 0;
};

/// Ground truth for one oriented pair: the side with the higher level wins.
inline constexpr Verdict truth_from_levels(Level a, Level b) noexcept {
  return a > b ? Verdict::A : (b > a ? Verdict::B : Verdict::inconclusive);
}

/// Key identifying an unordered (fabric, fabric, property) triple.
using PairKey = std::tuple<std::string, std::string, PropertyKind>;

inline PairKey unordered_key(const ComparisonTask& t) {
  return t.fabric_a < t.fabric_b ? PairKey{t.fabric_a, t.fabric_b, t.property}
                                  : PairKey{t.fabric_b, t.fabric_a, t.property};
}

namespace pairgen_detail {

inline LabeledPair make_pair(const FabricRecord& a, const FabricRecord& b, PropertyKind p, SplitKind split,
                             std::size_t index) {
  LabeledPair lp;
  lp.task.task_id = "pool-" + std::string(to_string(p)) + "-" + std::to_string(index);
  lp.task.property = p;
  lp.task.fabric_a = a.fabric_id;
  lp.task.fabric_b = b.fabric_id;
  lp.task.split = split;
  lp.label.task_id = lp.task.task_id;
  lp.label.truth = truth_from_levels(a.attributes[p], b.attributes[p]);
  return lp;
}

inline std::string numbered(std::string_view prefix, std::size_t i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%05zu", i + 1);
  return std::string(prefix) + buf;
}

inline void swap_sides(LabeledPair& lp) {
  std::swap(lp.task.fabric_a, lp.task.fabric_b);
  lp.label.truth = opposite(lp.label.truth);
}

}  // namespace pairgen_detail

/// Permutes one property's pairs under the seed, then orients them so the labeled winner
/// alternates A, B, A, ... (starting with B for odd property indices). Decidable answers end up
/// split exactly in half whenever the per-property counts are even. Task IDs are reassigned.
inline void finalize_split(std::vector<LabeledPair>& pairs, SplitKind split, std::uint64_t seed) {
  std::map<PropertyKind, std::vector<std::size_t>> by_property;
  for (std::size_t i = 0; i < pairs.size(); ++i) by_property[pairs[i].task.property].push_back(i);

  std::vector<LabeledPair> out;
  out.reserve(pairs.size());
  for (auto& [prop, idx] : by_property) {
    auto eng = keyed_engine(seed, "orient/" + std::string(to_string(split)) + "/" + std::string(to_string(prop)));
    std::shuffle(idx.begin(), idx.end(), eng);
    std::size_t decidable = 0;
    const std::size_t offset = index_of(prop) % 2;
    for (auto i : idx) {
      LabeledPair lp = pairs[i];
      if (lp.label.truth != Verdict::inconclusive) {
        const Verdict want = (decidable + offset) % 2 == 0 ? Verdict::A : Verdict::B;
        if (lp.label.truth != want) pairgen_detail::swap_sides(lp);
        ++decidable;
      }
      lp.task.split = split;
      lp.task.task_id = pairgen_detail::numbered(
          std::string(to_string(split)) + "-" + std::string(to_string(prop)) + "-", out.size());
      lp.label.task_id = lp.task.task_id;
      out.push_back(std::move(lp));
    }
  }
  pairs = std::move(out);
}

/// All level-0 vs level-2 pairs for one property; moderate fabrics are discarded.
/// Sides keep the input order of the records; the label points at the level-2 fabric.
inline std::vector<LabeledPair> build_extreme_pairs(const std::vector<FabricRecord>& records, PropertyKind property) {
  bool any_low = false, any_high = false;
  for (const auto& r : records) {
    any_low |= r.attributes[property] == 0;
    any_high |= r.attributes[property] == 2;
  }
  if (!any_low || !any_high)
    throw InsufficientVariation(std::string(to_string(property)) + " has no level-0 or no level-2 fabric");

  std::vector<LabeledPair> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t j = i + 1; j < records.size(); ++j) {
      const int la = records[i].attributes[property], lb = records[j].attributes[property];
      if ((la == 0 && lb == 2) || (la == 2 && lb == 0))
        out.push_back(pairgen_detail::make_pair(records[i], records[j], property, SplitKind::train, out.size()));
    }
  }
  return out;
}

/// Draws balanced train/val splits from an extreme-pair pool covering all four properties.
inline std::pair<std::vector<LabeledPair>, std::vector<LabeledPair>> sample_balanced(
    const std::vector<LabeledPair>& all_pairs, const SplitSpec& spec) {
  if (spec.n_train_pairs == 0 || spec.n_val_pairs == 0) throw ConfigError("split pair counts must be positive");
  if (spec.n_train_pairs % 4 != 0 || spec.n_val_pairs % 4 != 0)
    throw ConfigError("train and val pair counts must be divisible by the four attributes");
  const std::size_t train_per = spec.n_train_pairs / 4, val_per = spec.n_val_pairs / 4;

  std::array<std::vector<const LabeledPair*>, 4> pool;
  std::set<PairKey> seen;
  for (const auto& lp : all_pairs)
    if (seen.insert(unordered_key(lp.task)).second) pool[index_of(lp.task.property)].push_back(&lp);

  std::vector<LabeledPair> train, val;
  for (auto p : kAllProperties) {
    auto& candidates = pool[index_of(p)];
    if (candidates.size() < train_per + val_per)
      throw InsufficientPairs(std::string(to_string(p)), candidates.size(), train_per + val_per);
    auto eng = keyed_engine(spec.seed, "sample/" + std::string(to_string(p)));
    std::shuffle(candidates.begin(), candidates.end(), eng);
    for (std::size_t i = 0; i < val_per; ++i) val.push_back(*candidates[i]);
    for (std::size_t i = val_per; i < val_per + train_per; ++i) train.push_back(*candidates[i]);
  }
  finalize_split(train, SplitKind::train, spec.seed);
  finalize_split(val, SplitKind::val, spec.seed);
  return {std::move(train), std::move(val)};
}

/// Adjacent-level pairs (0 vs 1, 1 vs 2) for every property, labeled toward the higher level.
inline std::vector<LabeledPair> build_fine_grained_pairs(const std::vector<FabricRecord>& records) {
  std::vector<LabeledPair> out;
  for (auto p : kAllProperties) {
    for (std::size_t i = 0; i < records.size(); ++i) {
      for (std::size_t j = i + 1; j < records.size(); ++j) {
        const int la = records[i].attributes[p], lb = records[j].attributes[p];
        if (std::abs(la - lb) == 1)
          out.push_back(pairgen_detail::make_pair(records[i], records[j], p, SplitKind::fine_grained, out.size()));
      }
    }
  }
  return out;
}

struct FabricSplit {
  std::vector<std::string> train_ids;   // sorted
  std::vector<std::string> unseen_ids;  // sorted
};

/// Holds out spec.n_unseen_fabrics fabrics. When unseen_pairs_per_attribute is set, a seeded
/// local search picks a subset whose level counts give exactly that many 0-vs-2 pairs for every
/// attribute (n_low * n_high == target).
inline FabricSplit split_unseen(const std::vector<FabricRecord>& records, const SplitSpec& spec) {
  const std::size_t n = records.size(), k = spec.n_unseen_fabrics;
  if (k == 0) throw ConfigError("n_unseen_fabrics must be positive");
  if (n <= k)
    throw InsufficientFabrics(std::to_string(n) + " fabrics cannot supply " + std::to_string(k) +
                              " unseen fabrics plus a training set");

  auto eng = keyed_engine(spec.seed, "split_unseen");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<bool> chosen(n, false);

  const long target = static_cast<long>(spec.unseen_pairs_per_attribute);
  if (target == 0) {
    std::shuffle(order.begin(), order.end(), eng);
    for (std::size_t i = 0; i < k; ++i) chosen[order[i]] = true;
  } else {
    // Level counts (n_low, n_high) that give exactly `target` extreme pairs within k fabrics.
    std::vector<std::pair<long, long>> feasible;
    for (long a = 1; a <= static_cast<long>(k); ++a)
      if (target % a == 0 && a + target / a <= static_cast<long>(k)) feasible.emplace_back(a, target / a);
    if (feasible.empty())
      throw InsufficientVariation(std::to_string(k) + " fabrics cannot hold " + std::to_string(target) +
                                  " extreme pairs per attribute");
    // Distance of the current counts to the nearest feasible pair, summed over attributes.
    auto cost_of = [&](const std::array<long, 4>& lo, const std::array<long, 4>& hi) {
      long c = 0;
      for (std::size_t q = 0; q < 4; ++q) {
        long best = std::numeric_limits<long>::max();
        for (auto [a, b] : feasible) best = std::min(best, std::abs(lo[q] - a) + std::abs(hi[q] - b));
        c += best;
      }
      return c;
    };

    bool found = false;
    for (int restart = 0; restart < 32 && !found; ++restart) {
      std::shuffle(order.begin(), order.end(), eng);
      std::vector<std::size_t> in(order.begin(), order.begin() + static_cast<long>(k));
      std::vector<std::size_t> out(order.begin() + static_cast<long>(k), order.end());
      std::array<long, 4> low{}, high{};
      for (auto i : in)
        for (auto p : kAllProperties) {
          low[index_of(p)] += records[i].attributes[p] == 0;
          high[index_of(p)] += records[i].attributes[p] == 2;
        }
      long cost = cost_of(low, high);
      std::uniform_int_distribution<std::size_t> pick_in(0, k - 1), pick_out(0, out.size() - 1);
      // Annealed swaps: worse moves are taken with probability exp(-delta / temperature).
      const int steps = 50000;
      for (int step = 0; step < steps && cost > 0; ++step) {
        const double temperature = 1.5 * (1.0 - static_cast<double>(step) / steps) + 0.05;
        const std::size_t a = pick_in(eng), b = pick_out(eng);
        auto lo = low, hi = high;
        for (auto p : kAllProperties) {
          const auto q = index_of(p);
          lo[q] += (records[out[b]].attributes[p] == 0) - (records[in[a]].attributes[p] == 0);
          hi[q] += (records[out[b]].attributes[p] == 2) - (records[in[a]].attributes[p] == 2);
        }
        const long next = cost_of(lo, hi);
        if (next <= cost || unit_draw(eng) < std::exp(-static_cast<double>(next - cost) / temperature)) {
          std::swap(in[a], out[b]);
          low = lo;
          high = hi;
          cost = next;
        }
      }
      if (cost == 0) {
        for (auto i : in) chosen[i] = true;
        found = true;
      }
    }
    if (!found)
      throw InsufficientVariation("no " + std::to_string(k) + "-fabric unseen subset yields " +
                                  std::to_string(target) + " extreme pairs per attribute");
  }

  FabricSplit split;
  for (std::size_t i = 0; i < n; ++i) (chosen[i] ? split.unseen_ids : split.train_ids).push_back(records[i].fabric_id);
  std::sort(split.train_ids.begin(), split.train_ids.end());
  std::sort(split.unseen_ids.begin(), split.unseen_ids.end());
  return split;
}

/// Self-pairs: both sides present the same fabric, so the only correct answer is to abstain.
/// Fabrics are drawn without replacement under the seed; properties cycle in canonical order.
inline std::vector<LabeledPair> build_duplicate_pairs(const std::vector<FabricRecord>& records, std::size_t n,
                                                      std::uint64_t seed = 0) {
  if (n > records.size())
    throw InsufficientFabrics(std::to_string(records.size()) + " fabrics cannot supply " + std::to_string(n) +
                              " duplicate pairs");
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), 0);
  auto eng = keyed_engine(seed, "duplicates");
  std::shuffle(order.begin(), order.end(), eng);

  std::vector<LabeledPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = records[order[i]];
    LabeledPair lp;
    lp.task.task_id = pairgen_detail::numbered("duplicate-", i);
    lp.task.property = kAllProperties[i % 4];
    lp.task.fabric_a = r.fabric_id;
    lp.task.fabric_b = r.fabric_id;
    lp.task.split = SplitKind::duplicate;
    lp.label = {lp.task.task_id, Verdict::inconclusive};
    out.push_back(std::move(lp));
  }
  return out;
}

inline std::vector<FabricRecord> select_records(const std::vector<FabricRecord>& records,
                                                const std::vector<std::string>& ids) {
  std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<FabricRecord> out;
  for (const auto& r : records)
    if (wanted.count(r.fabric_id)) out.push_back(r);
  return out;
}

/// Every split the evaluation protocol uses, built from one manifest and one spec.
struct PairSets {
  FabricSplit fabrics;
  std::size_t extreme_pool_size = 0;
  std::vector<LabeledPair> train, val, fine_grained, unseen, duplicate;

  const std::vector<LabeledPair>& get(SplitKind s) const {
    switch (s) {
      case SplitKind::train: return train;
      case SplitKind::val: return val;
      case SplitKind::fine_grained: return fine_grained;
      case SplitKind::unseen: return unseen;
      case SplitKind::duplicate: return duplicate;
    }
    return train;
  }
};

inline PairSets build_all_splits(const std::vector<FabricRecord>& records, const SplitSpec& spec) {
  PairSets sets;
  sets.fabrics = split_unseen(records, spec);
  const auto train_fabrics = select_records(records, sets.fabrics.train_ids);
  const auto unseen_fabrics = select_records(records, sets.fabrics.unseen_ids);

  std::vector<LabeledPair> pool;
  for (auto p : kAllProperties) {
    auto part = build_extreme_pairs(train_fabrics, p);
    pool.insert(pool.end(), part.begin(), part.end());
  }
  sets.extreme_pool_size = pool.size();
  std::tie(sets.train, sets.val) = sample_balanced(pool, spec);

  sets.fine_grained = build_fine_grained_pairs(train_fabrics);
  finalize_split(sets.fine_grained, SplitKind::fine_grained, spec.seed);

  for (auto p : kAllProperties) {
    auto part = build_extreme_pairs(unseen_fabrics, p);
    sets.unseen.insert(sets.unseen.end(), part.begin(), part.end());
  }
  finalize_split(sets.unseen, SplitKind::unseen, spec.seed);

  sets.duplicate = build_duplicate_pairs(train_fabrics, spec.n_duplicate_pairs, spec.seed);
  return sets;
}

// Pair files (JSON Lines):
//   {"kind":"fabsel-pairs","seed":7,"config_hash":"...","split":"train","n_tasks":4000}
//   {"task_id":"train-elasticity-00001","property":"elasticity","fabric_a":"F0012","fabric_b":"F0150",
//    "split":"train","truth":"A"}

inline constexpr std::string_view kPairsKind = "fabsel-pairs";

inline void save_pairs(const std::filesystem::path& path, const std::vector<LabeledPair>& pairs, SplitKind split,
                       std::optional<std::uint64_t> seed, const std::string& config_hash) {
  std::vector<Json> rows;
  rows.reserve(pairs.size());
  for (const auto& lp : pairs) {
    Json j;
    j["task_id"] = lp.task.task_id;
    j["property"] = to_string(lp.task.property);
    j["fabric_a"] = lp.task.fabric_a;
    j["fabric_b"] = lp.task.fabric_b;
    j["split"] = to_string(lp.task.split);
    j["truth"] = to_string(lp.label.truth);
    rows.push_back(std::move(j));
  }
  FileHeader header{std::string(kPairsKind), seed, config_hash, Json::object()};
  header.extra["split"] = to_string(split);
  header.extra["n_tasks"] = pairs.size();
  write_jsonl(path, header, rows);
}

struct PairFile {
  FileHeader header;
  SplitKind split = SplitKind::train;
  std::vector<LabeledPair> pairs;
};

inline PairFile load_pairs(const std::filesystem::path& path) {
  auto doc = read_jsonl(path, std::string(kPairsKind));
  PairFile file;
  file.header = doc.header;
  if (!doc.header.extra.contains("split")) throw SchemaViolation(1, "pair header lacks 'split'");
  auto split = parse_split(doc.header.extra["split"].get<std::string>());
  if (!split) throw SchemaViolation(1, "unknown split in header");
  file.split = *split;
  std::set<std::string> ids;
  for (const auto& row : doc.lines) {
    LabeledPair lp;
    lp.task.task_id = field<std::string>(row, "task_id");
    auto prop = parse_property(field<std::string>(row, "property"));
    auto sk = parse_split(field<std::string>(row, "split"));
    if (!prop) throw SchemaViolation(row.line_no, "unknown property");
    if (!sk) throw SchemaViolation(row.line_no, "unknown split");
    lp.task.property = *prop;
    lp.task.split = *sk;
    lp.task.fabric_a = field<std::string>(row, "fabric_a");
    lp.task.fabric_b = field<std::string>(row, "fabric_b");
    try {
      lp.label = {lp.task.task_id, verdict_from_string(field<std::string>(row, "truth"))};
    } catch (const InvalidRecord& e) {
      throw SchemaViolation(row.line_no, e.what());
    }
    if (lp.task.fabric_a == lp.task.fabric_b && lp.task.split != SplitKind::duplicate)
      throw SchemaViolation(row.line_no, "self-pair outside the duplicate split");
    if (!ids.insert(lp.task.task_id).second) throw SchemaViolation(row.line_no, "repeated task_id");
    file.pairs.push_back(std::move(lp));
  }
  return file;
}

}  // namespace fabsel
