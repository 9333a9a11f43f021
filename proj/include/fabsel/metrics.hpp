#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fabsel/comparator.hpp"

namespace fabsel {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t tn = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// Property-wise accuracy in percent: (TP + TN) / (TP + TN + FP + FN).
inline double property_acc(const ConfusionCounts& c) {
  if (c.total() == 0) throw EmptyCounts("accuracy of an empty confusion table");
  return 100.0 * static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
}

/// Records one decision against its label. The labeled-A side is the positive class; an
/// abstention on a decidable pair is a miss. For equal-level pairs abstaining is the correct
/// (negative) answer.
inline void tally(ConfusionCounts& c, Verdict truth, Verdict decision) {
  switch (truth) {
    case Verdict::A: (decision == Verdict::A ? c.tp : c.fn) += 1; break;
    case Verdict::B: (decision == Verdict::B ? c.tn : c.fp) += 1; break;
    case Verdict::inconclusive: (decision == Verdict::inconclusive ? c.tn : c.fp) += 1; break;
  }
}

/// Prediction skewness SK = 2 * |p0 - 0.5| * 100, with p0 the share of decided predictions that
/// chose A. Abstentions are excluded.
inline double skewness_from_counts(std::uint64_t n_a, std::uint64_t n_decided) {
  if (n_decided == 0) throw NoDecisions("skewness needs at least one decided prediction");
  if (n_a > n_decided) throw InvalidRecord("more A predictions than decided predictions");
  // 2 * |n_a/n - 1/2| == |2 n_a - n| / n, kept in integers so swapping A and B is exact
  const std::uint64_t n_b = n_decided - n_a;
  const std::uint64_t gap = n_a > n_b ? n_a - n_b : n_b - n_a;
  return 100.0 * static_cast<double>(gap) / static_cast<double>(n_decided);
}

inline double skewness(std::span<const Verdict> predictions) {
  std::uint64_t n_a = 0, n_decided = 0;
  for (auto v : predictions) {
    if (v == Verdict::inconclusive) continue;
    ++n_decided;
    n_a += v == Verdict::A;
  }
  return skewness_from_counts(n_a, n_decided);
}

/// Natural-log cross-entropy of the true class.
inline double cross_entropy(const ComparisonDistribution& dist, Verdict truth) {
  check_distribution(dist);
  const double p = dist.mass(truth);
  if (p <= 0.0) throw InfiniteLoss("true class has zero probability");
  return -std::log(p);
}

/// Mean loss over (pair, property) items.
inline double mean_cross_entropy(std::span<const std::pair<ComparisonDistribution, Verdict>> batch) {
  if (batch.empty()) throw EmptyCounts("cross-entropy of an empty batch");
  double sum = 0.0;
  for (const auto& [dist, truth] : batch) sum += cross_entropy(dist, truth);
  return sum / static_cast<double>(batch.size());
}

}  // namespace fabsel
