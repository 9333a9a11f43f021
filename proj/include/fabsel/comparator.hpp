#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fabsel/error.hpp"
#include "fabsel/fabric.hpp"
#include "fabsel/pairgen.hpp"
#include "fabsel/property.hpp"
#include "fabsel/util.hpp"

namespace fabsel {

/// Probability triple over the three answer classes.
struct ComparisonDistribution {
  double p_a = 0.0;
  double p_b = 0.0;
  double p_inconclusive = 0.0;

  double mass(Verdict v) const noexcept {
    return v == Verdict::A ? p_a : v == Verdict::B ? p_b : p_inconclusive;
  }
  double sum() const noexcept { return p_a + p_b + p_inconclusive; }

  friend bool operator==(const ComparisonDistribution&, const ComparisonDistribution&) = default;
};

inline constexpr double kDistributionTolerance = 1e-6;

inline void check_distribution(const ComparisonDistribution& d) {
  for (double p : {d.p_a, d.p_b, d.p_inconclusive})
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidDistribution("component outside [0, 1]");
  if (std::abs(d.sum() - 1.0) > kDistributionTolerance)
    throw InvalidDistribution("components sum to " + format_double(d.sum()));
}

/// Argmax over the triple. Exact ties go to inconclusive first, then A, then B.
inline Verdict decide(const ComparisonDistribution& d) {
  check_distribution(d);
  if (d.p_inconclusive >= d.p_a && d.p_inconclusive >= d.p_b) return Verdict::inconclusive;
  return d.p_a >= d.p_b ? Verdict::A : Verdict::B;
}

struct ComparisonOutcome {
  Verdict decision = Verdict::inconclusive;
  std::string rationale;
  double latency_ms = 0.0;
  std::optional<ComparisonDistribution> distribution;

  friend bool operator==(const ComparisonOutcome&, const ComparisonOutcome&) = default;
};

/// Anything that answers "which fabric ranks higher on this property?".
/// Implementations must be callable concurrently from several threads.
class Comparator {
 public:
  virtual ~Comparator() = default;
  virtual ComparisonOutcome compare(const ComparisonTask& task) const = 0;
  /// Short description recorded in reports.
  virtual std::string identity() const = 0;
  /// Upper bound on concurrent compare() calls worth issuing.
  virtual std::size_t max_inflight() const { return 1; }
};

/// Adapts a callable; used for scripted and test comparators.
class FunctionComparator final : public Comparator {
 public:
  using Fn = std::function<ComparisonOutcome(const ComparisonTask&)>;
  FunctionComparator(std::string identity, Fn fn, std::size_t max_inflight = 1)
      : identity_(std::move(identity)), fn_(std::move(fn)), max_inflight_(max_inflight) {}

  ComparisonOutcome compare(const ComparisonTask& task) const override { return fn_(task); }
  std::string identity() const override { return identity_; }
  std::size_t max_inflight() const override { return max_inflight_; }

 private:
  std::string identity_;
  Fn fn_;
  std::size_t max_inflight_;
};

struct OracleConfig {
  double flip_prob = 0.0;     // mass moved to the wrong side
  double abstain_prob = 0.0;  // mass moved to inconclusive on decidable pairs
  std::uint64_t seed = 0;
  bool abstain_on_equal = true;  // equal-level pairs: abstain, or guess a side 50/50
};

inline void validate(const OracleConfig& cfg) {
  if (!(cfg.flip_prob >= 0.0 && cfg.flip_prob <= 0.5)) throw ConfigError("flip_prob must lie in [0, 0.5]");
  if (!(cfg.abstain_prob >= 0.0 && cfg.abstain_prob <= 1.0)) throw ConfigError("abstain_prob must lie in [0, 1]");
  if (cfg.flip_prob + cfg.abstain_prob > 1.0 + 1e-12) throw ConfigError("flip_prob + abstain_prob exceeds 1");
}

/// Ground-truth comparator distribution: 1-eps-alpha on the true side, eps on the other side,
/// alpha on inconclusive. Equal-level pairs put 1-eps on inconclusive and eps/2 on each side.
inline ComparisonDistribution oracle_compare(const ComparisonTask& task, const PairLabel& truth,
                                             const OracleConfig& cfg) {
  (void)task;
  validate(cfg);
  const double eps = cfg.flip_prob, alpha = cfg.abstain_prob;
  switch (truth.truth) {
    case Verdict::A: return {1.0 - eps - alpha, eps, alpha};
    case Verdict::B: return {eps, 1.0 - eps - alpha, alpha};
    case Verdict::inconclusive: break;
  }
  if (cfg.abstain_on_equal) return {eps / 2.0, eps / 2.0, 1.0 - eps};
  return {0.5, 0.5, 0.0};
}

/// Draws one class from an oracle distribution, keyed on (seed, task_id) so the answer does not
/// depend on call order. Classes are laid out on [0, 1) as true side, opposite side, inconclusive;
/// swapping the presentation order of a pair therefore picks the same winning fabric.
inline Verdict sample_oracle_verdict(const ComparisonDistribution& dist, Verdict truth, std::uint64_t seed,
                                     const std::string& task_id) {
  auto eng = keyed_engine(seed, "oracle/" + task_id);
  const double u = unit_draw(eng);
  if (truth == Verdict::inconclusive) {
    if (u < dist.p_inconclusive) return Verdict::inconclusive;
    return u < dist.p_inconclusive + dist.p_a ? Verdict::A : Verdict::B;
  }
  const Verdict other = opposite(truth);
  if (u < dist.mass(truth)) return truth;
  if (u < dist.mass(truth) + dist.mass(other)) return other;
  return Verdict::inconclusive;
}

/// Synthetic stand-in for a trained model: knows every fabric's annotated levels and answers with
/// configurable noise and abstention.
class OracleComparator final : public Comparator {
 public:
  OracleComparator(const std::vector<FabricRecord>& records, OracleConfig cfg) : cfg_(cfg) {
    validate(cfg_);
    for (const auto& r : records) levels_.emplace(r.fabric_id, r.attributes);
  }

  ComparisonOutcome compare(const ComparisonTask& task) const override {
    const Verdict truth = truth_from_levels(level(task.fabric_a, task.property), level(task.fabric_b, task.property));
    const auto dist = oracle_compare(task, PairLabel{task.task_id, truth}, cfg_);
    ComparisonOutcome out;
    out.decision = sample_oracle_verdict(dist, truth, cfg_.seed, task.task_id);
    // equal levels: a guessed winner is tied to the fabric, not the side it was shown on
    if (truth == Verdict::inconclusive && task.fabric_b < task.fabric_a) out.decision = opposite(out.decision);
    out.distribution = dist;
    return out;
  }

  std::string identity() const override {
    return "oracle(flip=" + format_double(cfg_.flip_prob) + ",abstain=" + format_double(cfg_.abstain_prob) +
           ",equal=" + (cfg_.abstain_on_equal ? "abstain" : "guess") + ")";
  }
  std::size_t max_inflight() const override { return 4; }
  const OracleConfig& config() const noexcept { return cfg_; }

 private:
  Level level(const std::string& id, PropertyKind p) const {
    auto it = levels_.find(id);
    if (it == levels_.end()) throw UnknownFabric(id);
    return it->second[p];
  }

  OracleConfig cfg_;
  std::unordered_map<std::string, AttributeVector> levels_;
};

}  // namespace fabsel
