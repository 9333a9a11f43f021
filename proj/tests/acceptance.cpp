// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "fabsel_app.hpp"
#include "mock_server.hpp"

using namespace fabsel;
namespace fs = std::filesystem;

namespace {

// Failed checks are collected rather than thrown so one line can list them all.
struct Check {
  std::vector<std::string> failures;
  std::string detail;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

struct Criterion {
  int number;
  std::string name;
  double budget_ms;  // 0: no runtime bound
  std::function<void(Check&)> body;
};

class ScratchDir {
 public:
  ScratchDir() {
    path_ = fs::temp_directory_path() / ("fabsel_acceptance_" + std::to_string(std::random_device{}()));
    fs::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

int cli_run(std::vector<std::string> args) {
  args.insert(args.begin(), "fabsel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  if (code != 0) std::cerr << "  fabsel " << args[1] << " exited " << code << ": " << err.str();
  return code;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<nlohmann::json> read_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(nlohmann::json::parse(line));
  return out;
}

// Shared dataset: 220 fabrics and default pair files on seed 7, built by criterion 2.
struct Workspace {
  ScratchDir dir;
  bool built = false;
  std::string manifest() const { return (dir / "data/manifest.jsonl").string(); }
  std::string pairs() const { return (dir / "pairs").string(); }
  bool build() {
    if (!built)
      built = cli_run({"gen-data", "--seed", "7", "--n-fabrics", "220", "--out", (dir / "data").string()}) == 0 &&
              cli_run({"gen-pairs", "--seed", "7", "--manifest", manifest(), "--n-train", "4000", "--n-val", "400",
                       "--out", pairs()}) == 0;
    return built;
  }
};

Workspace& workspace() {
  static Workspace w;
  return w;
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------------------------------------

void metric_closed_forms(Check& c) {
  int cases = 0;
  auto acc_case = [&](ConfusionCounts k, double num, double den) {
    c.expect(property_acc(k) == 100.0 * num / den, "acc " + std::to_string(num) + "/" + std::to_string(den));
    ++cases;
  };
  acc_case({5, 5, 0, 0}, 10, 10);
  acc_case({3, 1, 1, 1}, 4, 6);
  acc_case({0, 0, 2, 2}, 0, 4);
  acc_case({47, 47, 3, 3}, 94, 100);
  acc_case({1, 0, 0, 2}, 1, 3);
  acc_case({7, 0, 0, 0}, 7, 7);
  for (int tp = 0; tp <= 3; ++tp)
    for (int fn = 1; fn <= 2; ++fn) acc_case({static_cast<std::uint64_t>(tp), 0, 0, static_cast<std::uint64_t>(fn)}, tp, tp + fn);

  auto sk_case = [&](std::uint64_t a, std::uint64_t n, double expected) {
    c.expect(skewness_from_counts(a, n) == expected, "sk " + std::to_string(a) + "/" + std::to_string(n));
    ++cases;
  };
  sk_case(50, 100, 0.0);
  sk_case(100, 100, 100.0);
  sk_case(0, 100, 100.0);
  sk_case(3, 4, 50.0);
  sk_case(1, 4, 50.0);
  sk_case(53, 100, 6.0);
  {
    const std::vector<Verdict> v = {Verdict::A, Verdict::B, Verdict::inconclusive, Verdict::A, Verdict::A};
    c.expect(skewness(v) == 50.0, "sk with abstention");
    ++cases;
  }

  auto ce_case = [&](ComparisonDistribution d, Verdict t, double expected) {
    c.expect(std::abs(cross_entropy(d, t) - expected) <= 1e-9, "ce " + std::to_string(expected));
    ++cases;
  };
  ce_case({1.0 / 3, 1.0 / 3, 1.0 / 3}, Verdict::A, std::log(3.0));
  ce_case({0.5, 0.25, 0.25}, Verdict::B, std::log(4.0));
  ce_case({0.5, 0.25, 0.25}, Verdict::A, std::log(2.0));
  ce_case({0.94, 0.06, 0.0}, Verdict::A, -std::log(0.94));
  ce_case({0.1, 0.7, 0.2}, Verdict::inconclusive, -std::log(0.2));
  ce_case({1.0, 0.0, 0.0}, Verdict::A, 0.0);
  c.detail = std::to_string(cases) + " cases";
  c.expect(cases >= 20, "fewer than 20 cases");
}

void perfect_oracle_end_to_end(Check& c) {
  auto& w = workspace();
  c.expect(w.build(), "gen-data/gen-pairs failed");
  if (!w.built) return;
  const auto out = (w.dir / "eval_perfect").string();
  c.expect(cli_run({"eval", "--seed", "7", "--manifest", w.manifest(), "--pairs-dir", w.pairs(), "--split", "train,val",
                    "--out", out}) == 0,
           "eval failed");
  for (const char* split : {"train", "val"}) {
    const auto rep = parse_report(read_file(fs::path(out) / (std::string("eval_") + split + ".txt")));
    c.expect(rep.mean_acc == std::optional(100.0), std::string(split) + " mean ACC");
    c.expect(rep.sk == std::optional(0.0), std::string(split) + " SK");
    c.expect(rep.abstain_rate == 0.0, std::string(split) + " abstain");
    c.detail += std::string(c.detail.empty() ? "" : "; ") + split + ": n=" + std::to_string(rep.n_pairs) +
                " meanACC=" + report_detail::opt_number(rep.mean_acc) + " SK=" + report_detail::opt_number(rep.sk) +
                " abstain=" + format_double(rep.abstain_rate);
  }
}

void noise_calibration(Check& c) {
  auto& w = workspace();
  c.expect(w.build(), "dataset unavailable");
  if (!w.built) return;
  const auto out = (w.dir / "eval_noisy").string();
  c.expect(cli_run({"eval", "--seed", "7", "--flip-prob", "0.06", "--manifest", w.manifest(), "--pairs-dir",
                    w.pairs(), "--split", "train", "--out", out}) == 0,
           "eval failed");
  const auto rep = parse_report(read_file(fs::path(out) / "eval_train.txt"));
  const double n = static_cast<double>(rep.n_pairs);
  const double sigma = 100.0 * std::sqrt(0.94 * 0.06 / n);
  c.expect(rep.n_pairs == 4000, "pair count");
  c.expect(rep.mean_acc && std::abs(*rep.mean_acc - 94.0) <= 3 * sigma, "mean ACC outside 3 sigma");
  c.expect(rep.sk && *rep.sk < 3.0, "SK >= 3");
  c.detail = "meanACC=" + fmt(rep.mean_acc.value_or(-1)) + " (94 +/- " + fmt(3 * sigma) + ") SK=" + fmt(rep.sk.value_or(-1));
}

void split_integrity(Check& c) {
  auto& w = workspace();
  c.expect(w.build(), "dataset unavailable");
  if (!w.built) return;
  const fs::path dir = w.pairs();

  // Independent pass over the raw JSON.
  std::map<std::string, nlohmann::json> levels;
  for (const auto& row : read_lines(w.manifest()))
    if (row.contains("fabric_id")) levels[row["fabric_id"].get<std::string>()] = row["attributes"];
  std::set<std::string> train_fabrics, unseen_fabrics;
  for (const auto& row : read_lines(dir / "split_meta.jsonl")) {
    if (!row.contains("group")) continue;
    auto& target = row["group"] == "train_fabrics" ? train_fabrics : unseen_fabrics;
    for (const auto& id : row["fabric_ids"]) target.insert(id.get<std::string>());
  }
  std::size_t overlap = 0;
  for (const auto& id : unseen_fabrics) overlap += train_fabrics.count(id);
  c.expect(overlap == 0, "train/unseen fabric overlap");
  c.expect(!unseen_fabrics.empty() && !train_fabrics.empty(), "empty fabric groups");

  auto rows_of = [&](const std::string& split) {
    auto rows = read_lines(dir / (split + ".jsonl"));
    rows.erase(rows.begin());  // header
    return rows;
  };
  auto truth_of = [&](const nlohmann::json& r) {
    const auto& p = r["property"].get_ref<const std::string&>();
    const int a = levels.at(r["fabric_a"].get<std::string>())[p].get<int>();
    const int b = levels.at(r["fabric_b"].get<std::string>())[p].get<int>();
    return a > b ? "A" : (b > a ? "B" : "inconclusive");
  };

  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::size_t dup_triples = 0, wrong_labels = 0, foreign = 0;
  std::map<std::string, std::map<std::string, int>> per_attribute;
  for (const std::string split : {"train", "val"}) {
    for (const auto& r : rows_of(split)) {
      auto a = r["fabric_a"].get<std::string>(), b = r["fabric_b"].get<std::string>();
      if (b < a) std::swap(a, b);
      dup_triples += !seen.emplace(a, b, r["property"].get<std::string>()).second;
      wrong_labels += r["truth"] != truth_of(r);
      foreign += !train_fabrics.count(a) || !train_fabrics.count(b);
      ++per_attribute[split][r["property"].get<std::string>()];
    }
  }
  c.expect(dup_triples == 0, std::to_string(dup_triples) + " duplicated triples across train+val");
  for (const auto& prop : {"elasticity", "softness", "thickness", "texture"}) {
    c.expect(per_attribute["train"][prop] == 1000, std::string("train ") + prop);
    c.expect(per_attribute["val"][prop] == 100, std::string("val ") + prop);
  }
  const auto unseen = rows_of("unseen");
  for (const auto& r : unseen) {
    wrong_labels += r["truth"] != truth_of(r);
    foreign += !unseen_fabrics.count(r["fabric_a"].get<std::string>()) ||
               !unseen_fabrics.count(r["fabric_b"].get<std::string>());
  }
  const auto dups = rows_of("duplicate");
  for (const auto& r : dups) wrong_labels += r["fabric_a"] != r["fabric_b"] || r["truth"] != "inconclusive";
  c.expect(unseen.size() == 140, "unseen size " + std::to_string(unseen.size()));
  c.expect(dups.size() == 50, "duplicate size " + std::to_string(dups.size()));
  c.expect(wrong_labels == 0, std::to_string(wrong_labels) + " unsound labels");
  c.expect(foreign == 0, std::to_string(foreign) + " pairs use fabrics outside their group");
  c.detail = "overlap=" + std::to_string(overlap) + " dup_triples=" + std::to_string(dup_triples) +
             " train=" + std::to_string(rows_of("train").size()) + " val=" + std::to_string(rows_of("val").size()) +
             " unseen=" + std::to_string(unseen.size()) + " duplicate=" + std::to_string(dups.size());
}

void synchronization(Check& c) {
  std::size_t sessions = 0, bad = 0;
  for (const auto& rec : generate_synthetic_dataset(220, 7))
    for (const auto& s : rec.sessions) {
      ++sessions;
      const auto out = synchronize_press(s);
      bad += out.size() != 250 || std::any_of(out.begin(), out.end(), [](const auto& f) { return f.dt_ms != 0; });
    }
  c.expect(sessions == 440 && bad == 0, std::to_string(bad) + " of " + std::to_string(sessions) + " sessions off");

  std::mt19937_64 eng(11);
  std::uniform_int_distribution<int> jitter(-5, 5);
  PressSession s;
  for (int i = 0; i < 250; ++i) {
    s.frames.push_back({i * 40 + jitter(eng), "f" + std::to_string(i), {}});
    s.pressure.push_back({i * 40, 100.0 + i});
  }
  const auto out = synchronize_press(s);
  Millis max_dt = 0;
  for (const auto& f : out) max_dt = std::max(max_dt, f.dt_ms);
  c.expect(max_dt <= 5, "jitter max dt " + std::to_string(max_dt));

  PressSession gap;
  gap.frames.push_back({65, "late", {}});
  gap.pressure = {{0, 100.0}, {40, 120.0}};
  bool raised = false;
  try {
    synchronize_press(gap);
  } catch (const UnalignedFrame& e) {
    raised = e.gap_ms() == 25;
  }
  c.expect(raised, "25 ms gap did not raise UnalignedFrame");
  c.detail = std::to_string(sessions) + " sessions x 250 frames dt=0; jitter max dt=" + std::to_string(max_dt) +
             "; 25 ms gap raised=" + (raised ? "yes" : "no");
}

void ranking_soundness(Check& c) {
  std::size_t orderings = 0, wrong = 0;
  for (std::size_t n = 2; n <= 6; ++n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("F" + std::to_string(i));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::map<std::string, int> latent;
      for (std::size_t i = 0; i < n; ++i) latent[ids[i]] = perm[i];
      FunctionComparator perfect("latent", [&](const ComparisonTask& t) {
        ComparisonOutcome o;
        const int a = latent.at(t.fabric_a), b = latent.at(t.fabric_b);
        o.decision = a > b ? Verdict::A : (b > a ? Verdict::B : Verdict::inconclusive);
        return o;
      });
      const auto res = rank_by_property(ids, PropertyKind::softness, perfect);
      std::vector<std::string> expected(n);
      for (const auto& [id, v] : latent) expected[n - 1 - static_cast<std::size_t>(v)] = id;
      wrong += res.order != expected;
      ++orderings;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  c.expect(orderings == 872, "orderings " + std::to_string(orderings));
  c.expect(wrong == 0, std::to_string(wrong) + " orders wrong");
  c.detail = std::to_string(orderings) + " orderings, " + std::to_string(wrong) + " wrong";
}

// Level-based scoring: position = candidates with a higher level + half of those level with it.
std::string brute_force_winner(const Scenario& s, const std::map<std::string, AttributeVector>& lv) {
  const double last = static_cast<double>(s.candidates.size() - 1);
  std::map<std::string, double> total;
  for (const auto& t : s.targets)
    for (const auto& c : s.candidates) {
      double higher = 0, same = 0;
      for (const auto& o : s.candidates) {
        if (o == c) continue;
        higher += lv.at(o)[t.property] > lv.at(c)[t.property];
        same += lv.at(o)[t.property] == lv.at(c)[t.property];
      }
      const double pos = higher + same / 2;
      double v = 0.5;
      if (t.level == 2) v = (last - pos) / last;
      if (t.level == 0) v = pos / last;
      if (t.level == 1 && s.candidates.size() > 2) v = 1.0 - std::abs(pos - last / 2) / (last / 2);
      total[c] += v / static_cast<double>(s.targets.size());
    }
  std::string best;
  double best_score = -1;
  for (const auto& [id, v] : total)
    if (v > best_score + 1e-12) best = id, best_score = v;
  return best;
}

void selection_fixtures(Check& c) {
  const fs::path dir = fs::path(FABSEL_DATA_DIR) / "scenarios";
  const auto records = load_manifest(dir / "candidates.jsonl", nullptr, false);
  std::map<std::string, AttributeVector> lv;
  for (const auto& r : records) lv[r.fabric_id] = r.attributes;
  const OracleComparator perfect(records, {0.0, 0.0, 1});

  int agree = 0, total = 0;
  std::vector<std::vector<ScenarioTarget>> target_sets;
  for (int i = 1; i <= 10; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "s%02d.json", i);
    const auto s = load_scenario(dir / name);
    target_sets.push_back(s.targets);
    ++total;
    agree += select_fabric(s, perfect).chosen == brute_force_winner(s, lv);
  }
  c.expect(agree == 10, std::to_string(agree) + "/10 scenarios match the brute-force winner");

  // Every level-separable 3-candidate fixture for each scenario's targets.
  std::size_t fixtures = 0, it_agree = 0;
  const std::vector<std::string> ids = {"x", "y", "z"};
  for (const auto& targets : target_sets) {
    const std::size_t t = targets.size();
    std::size_t combos = 1;
    for (std::size_t k = 0; k < t; ++k) combos *= 6;
    for (std::size_t code = 0; code < combos; ++code) {
      std::map<std::string, AttributeVector> fx;
      for (const auto& id : ids) fx[id] = AttributeVector{1, 1, 1, 1};
      std::size_t rest = code;
      for (const auto& target : targets) {
        std::vector<int> perm = {0, 1, 2};
        for (std::size_t k = rest % 6; k > 0; --k) std::next_permutation(perm.begin(), perm.end());
        rest /= 6;
        for (std::size_t i = 0; i < 3; ++i) fx[ids[i]].set(target.property, perm[i]);
      }
      const bool separable = std::any_of(ids.begin(), ids.end(), [&](const auto& id) {
        return std::all_of(targets.begin(), targets.end(),
                           [&](const auto& tg) { return fx[id][tg.property] == tg.level; });
      });
      if (!separable) continue;
      std::vector<FabricRecord> rs;
      std::vector<SymbolicPrediction> preds;
      for (const auto& id : ids) {
        FabricRecord r;
        r.fabric_id = id;
        r.image_ref = "images/" + id + ".png";
        r.attributes = fx[id];
        rs.push_back(r);
        preds.push_back({id, fx[id]});
      }
      Scenario s{"fx", "fixture", targets, ids};
      const auto comparator_pick = select_fabric(s, OracleComparator(rs, {0.0, 0.0, 1})).chosen;
      ++fixtures;
      it_agree += comparator_pick == it_pipeline_select(s, preds).chosen && comparator_pick == brute_force_winner(s, fx);
    }
  }
  c.expect(fixtures > 0 && it_agree == fixtures,
           std::to_string(it_agree) + "/" + std::to_string(fixtures) + " level-separable fixtures agree");
  c.detail = std::to_string(agree) + "/" + std::to_string(total) + " scenarios; IT agreement " +
             std::to_string(it_agree) + "/" + std::to_string(fixtures) + " level-separable fixtures";
}

void duplicate_behavior(Check& c) {
  auto& w = workspace();
  c.expect(w.build(), "dataset unavailable");
  if (!w.built) return;
  double rates[2] = {-1, -1};
  for (int guess = 0; guess < 2; ++guess) {
    const auto out = (w.dir / (guess ? "dup_guess" : "dup_abstain")).string();
    std::vector<std::string> args = {"eval", "--manifest", w.manifest(), "--pairs-dir", w.pairs(), "--split",
                                     "duplicate", "--out", out};
    if (guess) args.push_back("--guess-on-equal");
    c.expect(cli_run(args) == 0, "eval failed");
    rates[guess] = parse_report(read_file(fs::path(out) / "eval_duplicate.txt")).abstain_rate;
  }
  c.expect(rates[0] == 1.0, "abstaining oracle rate " + format_double(rates[0]));
  c.expect(rates[1] == 0.0, "never-abstain oracle rate " + format_double(rates[1]));
  c.detail = "abstain rate " + format_double(rates[0]) + " (abstain on equal), " + format_double(rates[1]) +
             " (never abstain)";
}

void wire_protocol(Check& c) {
  const auto ds = generate_synthetic_dataset(4, 3);
  ComparisonInput in;
  in.task_id = "val-texture-00001";
  in.property = PropertyKind::texture;
  in.side_a = build_evidence(ds[0]);
  in.side_b = build_evidence(ds[1]);
  auto endpoint = [](const std::string& url) {
    EndpointConfig cfg;
    cfg.url = url;
    cfg.timeout_s = 0.25;
    cfg.backoff_base_ms = 10;
    return cfg;
  };

  {
    test::MockServer server({test::answer("ANSWER: A\nrougher"), test::answer("ANSWER: B"),
                             test::answer("ANSWER: INCONCLUSIVE")});
    const auto cfg = endpoint(server.url());
    c.expect(remote_compare(in, cfg).decision == Verdict::A, "class A");
    c.expect(remote_compare(in, cfg).decision == Verdict::B, "class B");
    c.expect(remote_compare(in, cfg).decision == Verdict::inconclusive, "class INCONCLUSIVE");
    c.expect(server.hits() == 3, "round trip hits");
  }
  std::size_t retry_hits = 0, exhaust_hits = 0, malformed_hits = 0;
  {
    test::MockServer server({{503, "busy", 0}, {200, "{\"text\":\"ANSWER: A\"}", 600}, test::answer("ANSWER: B")});
    c.expect(remote_compare(in, endpoint(server.url())).decision == Verdict::B, "answer after retries");
    retry_hits = server.hits();
    c.expect(retry_hits == 3, "503 + timeout should take 3 attempts");
  }
  {
    test::MockServer server;
    server.set_fallback(test::Step{500, "down", 0});
    bool transport = false;
    try {
      remote_compare(in, endpoint(server.url()));
    } catch (const TransportError&) {
      transport = true;
    }
    exhaust_hits = server.hits();
    c.expect(transport && exhaust_hits == 3, "persistent 500 should stop after 3 attempts");
  }
  {
    test::MockServer server({test::answer("Probably the first one"), test::answer("ANSWER: A")});
    bool malformed = false;
    try {
      remote_compare(in, endpoint(server.url()));
    } catch (const MalformedResponse&) {
      malformed = true;
    }
    malformed_hits = server.hits();
    c.expect(malformed && malformed_hits == 1, "MalformedResponse must not be retried");
  }

  // distill-build in fixture mode over the unseen split, parsed back line by line
  auto& w = workspace();
  c.expect(w.build(), "dataset unavailable");
  ScratchDir dir;
  {
    std::ofstream f(dir / "teacher.jsonl");
    f << "{\"task_id\":\"*\",\"text\":\"{ranking} The {property} evidence supports it.\"}\n";
  }
  const auto out = dir / "explanations.jsonl";
  c.expect(cli_run({"distill-build", "--pairs", w.pairs() + "/unseen.jsonl", "--teacher-fixture",
                    (dir / "teacher.jsonl").string(), "--manifest", w.manifest(), "--out",
                    out.string()}) == 0,
           "distill-build failed");
  std::size_t rows = 0, parsed = 0;
  auto doc = read_jsonl(out, "fabsel-explanations");
  for (const auto& row : doc.lines) {
    ++rows;
    try {
      const auto rec = explanation_from_json(row);
      parsed += !rec.teacher_explanation.empty();
    } catch (const Error&) {
    }
  }
  c.expect(rows == 140 && parsed == rows, std::to_string(parsed) + "/" + std::to_string(rows) + " records parse back");
  c.detail = "3 classes ok; retry hits=" + std::to_string(retry_hits) + " exhaust hits=" + std::to_string(exhaust_hits) +
             " malformed hits=" + std::to_string(malformed_hits) + "; explanations parsed " + std::to_string(parsed) +
             "/" + std::to_string(rows);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "metric closed forms", 1000, metric_closed_forms},
      {2, "perfect-oracle end-to-end", 10000, perfect_oracle_end_to_end},
      {3, "noise calibration eps=0.06", 10000, noise_calibration},
      {4, "split integrity", 0, split_integrity},
      {5, "synchronization", 0, synchronization},
      {6, "ranking soundness", 5000, ranking_soundness},
      {7, "selection fixtures", 0, selection_fixtures},
      {8, "duplicate-pair behavior", 0, duplicate_behavior},
      {9, "wire protocol", 0, wire_protocol},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(check);
    } catch (const std::exception& e) {
      check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    if (cr.budget_ms > 0 && ms > cr.budget_ms)
      check.failures.push_back("took " + fmt(ms, 0) + " ms, budget " + fmt(cr.budget_ms, 0) + " ms");
    const bool ok = check.failures.empty();
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << cr.number << " (" << cr.name << "): " << check.detail
              << " [" << fmt(ms, 1) << " ms]";
    for (const auto& f : check.failures) std::cout << " | " << f;
    std::cout << std::endl;
  }
  std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed")) << "\n";
  return failed ? 1 : 0;
}
