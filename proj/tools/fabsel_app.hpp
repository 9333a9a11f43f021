#pragma once

// Command-line harness. Kept in a header so tests can drive it in-process.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "fabsel/fabsel.hpp"

namespace fabsel::cli {

/// Exit codes.
enum ExitCode : int { kOk = 0, kConfigError = 2, kIoError = 3, kTransportError = 4, kDataError = 5 };

inline int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return kConfigError;
    case ErrorCategory::io: return kIoError;
    case ErrorCategory::transport: return kTransportError;
    case ErrorCategory::data: return kDataError;
  }
  return kDataError;
}

struct OracleSpec {
  OracleConfig cfg;
};
struct RemoteSpec {
  EndpointConfig endpoint;
};
using ComparatorSpec = std::variant<OracleSpec, RemoteSpec>;

/// Everything that determines an experiment's outputs.
struct RunConfig {
  std::uint64_t seed = 7;
  std::string manifest;
  SplitSpec split;
  ComparatorSpec comparator = OracleSpec{};
  std::string out;
};

inline std::unique_ptr<Comparator> make_comparator(const RunConfig& cfg, const std::vector<FabricRecord>& records) {
  if (const auto* o = std::get_if<OracleSpec>(&cfg.comparator)) return std::make_unique<OracleComparator>(records, o->cfg);
  const auto& r = std::get<RemoteSpec>(cfg.comparator);
  return std::make_unique<RemoteComparator>(records, r.endpoint);
}

inline bool is_oracle(const RunConfig& cfg) { return std::holds_alternative<OracleSpec>(cfg.comparator); }

/// Raw option values bound to CLI11 before they are assembled into a RunConfig.
struct Options {
  std::uint64_t seed = 7;
  std::string out;
  std::string manifest;
  std::string comparator = "oracle";
  double flip_prob = 0.0;
  double abstain_prob = 0.0;
  bool guess_on_equal = false;
  std::string endpoint_url;
  double timeout_s = 60.0;
  std::size_t max_inflight = 4;
  int backoff_ms = 1000;
  bool record_timing = false;

  // gen-data
  std::size_t n_fabrics = 220;
  // gen-pairs
  std::size_t n_train = 4000, n_val = 400, n_unseen = 20, unseen_per_attribute = 35, n_duplicates = 50;
  // eval
  std::string pairs_dir;
  std::string split = "all";
  // rank
  std::string property;
  std::string candidates;
  // select
  std::string scenario;
  std::string pipeline = "comparator";
  double predictor_accuracy = 1.0;
  // distill-build
  std::string pairs_file;
  std::string teacher_fixture;
  bool mark_refined = false;
};

inline RunConfig to_run_config(const Options& o) {
  RunConfig cfg;
  cfg.seed = o.seed;
  cfg.manifest = o.manifest;
  cfg.out = o.out;
  cfg.split = SplitSpec{o.n_train, o.n_val, o.n_unseen, o.unseen_per_attribute, o.n_duplicates, o.seed};
  if (o.comparator == "oracle") {
    OracleConfig oc{o.flip_prob, o.abstain_prob, o.seed, !o.guess_on_equal};
    validate(oc);
    cfg.comparator = OracleSpec{oc};
  } else if (o.comparator == "remote") {
    if (!(o.timeout_s > 0.0)) throw ConfigError("--timeout-s must be positive");
    if (o.max_inflight == 0) throw ConfigError("--max-inflight must be positive");
    EndpointConfig ec;
    ec.url = resolve_endpoint_url(o.endpoint_url);
    ec.timeout_s = o.timeout_s;
    ec.max_inflight = o.max_inflight;
    ec.backoff_base_ms = o.backoff_ms;
    cfg.comparator = RemoteSpec{ec};
  } else {
    throw ConfigError("--comparator must be 'oracle' or 'remote'");
  }
  return cfg;
}

/// Canonical text of the settings that shape a command's output; hashed into every file.
inline std::string canonical_config(const std::string& command, const Options& o) {
  std::ostringstream s;
  s << "command=" << command << ";seed=" << o.seed;
  if (command == "gen-data") s << ";n_fabrics=" << o.n_fabrics;
  if (command == "gen-pairs")
    s << ";n_train=" << o.n_train << ";n_val=" << o.n_val << ";n_unseen=" << o.n_unseen
      << ";unseen_per_attribute=" << o.unseen_per_attribute << ";n_duplicates=" << o.n_duplicates;
  if (command == "eval" || command == "rank" || command == "select") {
    s << ";comparator=" << o.comparator;
    if (o.comparator == "oracle")
      s << ";flip=" << format_double(o.flip_prob) << ";abstain=" << format_double(o.abstain_prob)
        << ";equal=" << (o.guess_on_equal ? "guess" : "abstain");
    else
      s << ";endpoint=" << o.endpoint_url << ";timeout_s=" << format_double(o.timeout_s);
  }
  if (command == "eval") s << ";split=" << o.split;
  if (command == "rank") s << ";property=" << o.property << ";candidates=" << o.candidates;
  if (command == "select")
    s << ";scenario=" << std::filesystem::path(o.scenario).filename().string() << ";pipeline=" << o.pipeline
      << ";predictor_accuracy=" << format_double(o.predictor_accuracy);
  if (command == "distill-build")
    s << ";pairs=" << std::filesystem::path(o.pairs_file).filename().string()
      << ";teacher=" << (o.teacher_fixture.empty() ? "remote" : "fixture") << ";refined=" << o.mark_refined;
  return s.str();
}

inline std::string config_hash(const std::string& command, const Options& o) {
  return hex64(fnv1a(canonical_config(command, o)));
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto comma = s.find(',', start);
    if (comma == std::string::npos) comma = s.size();
    auto item = std::string(trim(std::string_view(s).substr(start, comma - start)));
    if (!item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_for_write(path);
  out << text;
  if (!out) throw IOFailure("write failed for " + path.string());
}

inline std::vector<FabricRecord> require_manifest(const Options& o, bool with_sessions) {
  if (o.manifest.empty()) throw ConfigError("--manifest is required");
  return load_manifest(o.manifest, nullptr, with_sessions);
}

class Timer {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Wall time written to reports: real for remote runs, 0 for oracle runs unless asked, so
/// oracle reruns stay byte-identical.
inline double reported_wall_ms(const RunConfig& cfg, const Options& o, double measured) {
  return (is_oracle(cfg) && !o.record_timing) ? 0.0 : measured;
}

inline int cmd_gen_data(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw ConfigError("--out is required");
  const auto records = generate_synthetic_dataset(o.n_fabrics, o.seed);
  const auto path = std::filesystem::path(o.out) / "manifest.jsonl";
  save_manifest(records, path, ManifestInfo{o.seed, config_hash("gen-data", o)});
  out << "wrote " << records.size() << " fabrics, " << 2 * records.size() << " press sessions to " << path.string()
      << "\n";
  return kOk;
}

inline int cmd_gen_pairs(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw ConfigError("--out is required");
  const auto cfg = to_run_config(o);
  const auto records = require_manifest(o, false);
  const auto sets = build_all_splits(records, cfg.split);
  const auto hash = config_hash("gen-pairs", o);
  const std::filesystem::path dir(o.out);
  for (auto s : kAllSplits) save_pairs(dir / (std::string(to_string(s)) + ".jsonl"), sets.get(s), s, o.seed, hash);

  FileHeader meta{"fabsel-split-meta", o.seed, hash, Json::object()};
  meta.extra["extreme_pool_size"] = sets.extreme_pool_size;
  meta.extra["n_train_fabrics"] = sets.fabrics.train_ids.size();
  meta.extra["n_unseen_fabrics"] = sets.fabrics.unseen_ids.size();
  Json counts = Json::object();
  for (auto s : kAllSplits) counts[std::string(to_string(s))] = sets.get(s).size();
  meta.extra["counts"] = counts;
  write_jsonl(dir / "split_meta.jsonl", meta,
              {Json{{"group", "train_fabrics"}, {"fabric_ids", sets.fabrics.train_ids}},
               Json{{"group", "unseen_fabrics"}, {"fabric_ids", sets.fabrics.unseen_ids}}});

  out << "extreme pool " << sets.extreme_pool_size << " pairs;";
  for (auto s : kAllSplits) out << " " << to_string(s) << "=" << sets.get(s).size();
  out << "\n";
  return kOk;
}

inline int cmd_eval(const Options& o, std::ostream& out) {
  if (o.pairs_dir.empty()) throw ConfigError("--pairs-dir is required");
  if (o.out.empty()) throw ConfigError("--out is required");
  const auto cfg = to_run_config(o);
  std::vector<SplitKind> splits;
  if (o.split == "all") {
    splits.assign(kAllSplits.begin(), kAllSplits.end());
  } else {
    for (const auto& name : split_list(o.split)) {
      auto s = parse_split(name);
      if (!s) throw ConfigError("unknown split '" + name + "'");
      splits.push_back(*s);
    }
  }
  const auto records = require_manifest(o, !is_oracle(cfg));
  const auto comparator = make_comparator(cfg, records);
  const auto hash = config_hash("eval", o);

  std::vector<EvalReport> reports;
  for (auto s : splits) {
    const auto file = load_pairs(std::filesystem::path(o.pairs_dir) / (std::string(to_string(s)) + ".jsonl"));
    EvalOptions eo{std::string(to_string(s)), o.seed, hash, is_oracle(cfg) ? 0 : o.max_inflight};
    auto rep = evaluate_split(file.pairs, *comparator, eo);
    std::cerr << "eval " << to_string(s) << ": " << format_double(rep.wall_ms) << " ms\n";
    rep.wall_ms = reported_wall_ms(cfg, o, rep.wall_ms);
    write_text(std::filesystem::path(o.out) / ("eval_" + std::string(to_string(s)) + ".txt"),
               emit_report(rep, ReportFormat::machine));
    reports.push_back(std::move(rep));
  }
  const auto table = emit_table(reports);
  write_text(std::filesystem::path(o.out) / "eval_table.txt", table);
  out << table;
  return kOk;
}

inline void add_run_fields(KeyValueDoc& doc, const RunConfig& cfg, const Comparator* comparator, const std::string& hash,
                           double wall_ms) {
  doc.add("comparator", comparator ? comparator->identity() : std::string("none"));
  doc.add("seed", std::to_string(cfg.seed));
  doc.add("config_hash", hash);
  doc.add("wall_ms", format_double(wall_ms));
}

inline int cmd_rank(const Options& o, std::ostream& out) {
  if (o.out.empty()) throw ConfigError("--out is required");
  const auto property = parse_property(o.property);
  if (!property) throw ConfigError("--property must be one of elasticity, softness, thickness, texture");
  const auto candidates = split_list(o.candidates);
  const auto cfg = to_run_config(o);
  const auto records = require_manifest(o, !is_oracle(cfg));
  for (const auto& c : candidates)
    if (std::none_of(records.begin(), records.end(), [&](const auto& r) { return r.fabric_id == c; }))
      throw UnknownFabric(c + " is not in the manifest");
  const auto comparator = make_comparator(cfg, records);
  Timer timer;
  const auto result = rank_by_property(candidates, *property, *comparator);
  const double ms = timer.elapsed_ms();
  std::cerr << "rank: " << format_double(ms) << " ms\n";
  auto doc = tournament_to_kv(result);
  add_run_fields(doc, cfg, comparator.get(), config_hash("rank", o), reported_wall_ms(cfg, o, ms));
  write_text(o.out, doc.emit());
  out << to_string(*property) << ": " << selection_detail::join(result.order, " > ") << "\n";
  return kOk;
}

inline int cmd_select(const Options& o, std::ostream& out) {
  if (o.scenario.empty()) throw ConfigError("--scenario is required");
  if (o.out.empty()) throw ConfigError("--out is required");
  const auto scenario = load_scenario(o.scenario);
  const auto cfg = to_run_config(o);
  const bool symbolic = o.pipeline == "symbolic";
  if (!symbolic && o.pipeline != "comparator") throw ConfigError("--pipeline must be 'comparator' or 'symbolic'");
  const auto records = require_manifest(o, !symbolic && !is_oracle(cfg));
  for (const auto& c : scenario.candidates)
    if (std::none_of(records.begin(), records.end(), [&](const auto& r) { return r.fabric_id == c; }))
      throw UnknownFabric(c + " (scenario " + scenario.scenario_id + ") is not in the manifest");

  Timer timer;
  SelectionReport report;
  std::unique_ptr<Comparator> comparator;
  if (symbolic) {
    if (!(o.predictor_accuracy >= 0.0 && o.predictor_accuracy <= 1.0))
      throw ConfigError("--predictor-accuracy must lie in [0, 1]");
    std::vector<SymbolicPrediction> predictions;
    for (const auto& r : records) {
      auto eng = keyed_engine(o.seed, "predict/" + r.fabric_id);
      predictions.push_back({r.fabric_id, noisy_levels(r.attributes, o.predictor_accuracy, eng)});
    }
    report = it_pipeline_select(scenario, predictions);
  } else {
    comparator = make_comparator(cfg, records);
    report = select_fabric(scenario, *comparator);
  }
  const double ms = timer.elapsed_ms();
  std::cerr << "select " << scenario.scenario_id << ": " << format_double(ms) << " ms\n";
  auto doc = selection_to_kv(report);
  add_run_fields(doc, cfg, comparator.get(), config_hash("select", o), reported_wall_ms(cfg, o, ms));
  write_text(o.out, doc.emit());
  out << scenario.scenario_id << " (" << scenario.title << "): chose " << report.chosen << "\n";
  for (const auto& step : report.trace.steps) out << "  [" << to_string(step.kind) << "] " << step.text << "\n";
  return kOk;
}

inline int cmd_distill_build(const Options& o, std::ostream& out) {
  if (o.pairs_file.empty()) throw ConfigError("--pairs is required");
  if (o.out.empty()) throw ConfigError("--out is required");
  const auto records = require_manifest(o, true);
  const auto pairs = load_pairs(o.pairs_file);
  std::unique_ptr<TeacherSource> teacher;
  if (!o.teacher_fixture.empty()) {
    teacher = std::make_unique<FixtureTeacher>(FixtureTeacher::from_file(o.teacher_fixture));
  } else {
    EndpointConfig ec;
    ec.url = resolve_endpoint_url(o.endpoint_url);
    ec.timeout_s = o.timeout_s;
    ec.backoff_base_ms = o.backoff_ms;
    teacher = std::make_unique<RemoteTeacher>(ec);
  }
  const auto result = distill_build(pairs.pairs, records, *teacher, o.mark_refined);
  save_explanations(o.out, result, o.seed, config_hash("distill-build", o));
  out << "wrote " << result.records.size() << " explanation records (" << result.skipped_empty
      << " skipped for empty explanations) to " << o.out << "\n";
  return kOk;
}

/// Entry point shared by the binary and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"fabsel: preference-based fabric ranking and selection"};
  app.set_config("--config", "", "Plain-text config file (key = value, [subcommand] sections)");
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("--seed", o.seed, "Random seed recorded in every output")->capture_default_str();
  app.add_option("--out", o.out, "Output directory (gen-data, gen-pairs, eval) or file (rank, select, distill-build)");
  app.add_option("--manifest", o.manifest, "Fabric manifest (manifest.jsonl)");
  app.add_option("--comparator", o.comparator, "oracle | remote")->capture_default_str();
  app.add_option("--flip-prob", o.flip_prob, "Oracle flip probability")->capture_default_str();
  app.add_option("--abstain-prob", o.abstain_prob, "Oracle abstention probability")->capture_default_str();
  app.add_flag("--guess-on-equal", o.guess_on_equal, "Oracle never abstains on equal-level pairs");
  app.add_option("--endpoint-url", o.endpoint_url, std::string("Model endpoint (else $") + kEndpointEnvVar + ")");
  app.add_option("--timeout-s", o.timeout_s, "Remote request timeout in seconds")->capture_default_str();
  app.add_option("--max-inflight", o.max_inflight, "Concurrent remote requests")->capture_default_str();
  app.add_option("--backoff-ms", o.backoff_ms, "Base retry backoff in milliseconds")->capture_default_str();
  app.add_flag("--record-timing", o.record_timing, "Write measured wall time into oracle-mode reports");
  app.add_option("--split", o.split, "Split(s) to evaluate: train,val,fine_grained,unseen,duplicate or all")
      ->capture_default_str();

  auto* gen_data = app.add_subcommand("gen-data", "Generate a synthetic fabric dataset");
  gen_data->add_option("--n-fabrics", o.n_fabrics)->capture_default_str();

  auto* gen_pairs = app.add_subcommand("gen-pairs", "Build train/val/fine-grained/unseen/duplicate pair files");
  gen_pairs->add_option("--n-train", o.n_train)->capture_default_str();
  gen_pairs->add_option("--n-val", o.n_val)->capture_default_str();
  gen_pairs->add_option("--n-unseen", o.n_unseen)->capture_default_str();
  gen_pairs->add_option("--unseen-pairs-per-attribute", o.unseen_per_attribute)->capture_default_str();
  gen_pairs->add_option("--n-duplicates", o.n_duplicates)->capture_default_str();

  auto* eval = app.add_subcommand("eval", "Evaluate a comparator on pair splits");
  eval->add_option("--pairs-dir", o.pairs_dir, "Directory written by gen-pairs");

  auto* rank = app.add_subcommand("rank", "Rank candidates on one property");
  rank->add_option("--property", o.property)->required();
  rank->add_option("--candidates", o.candidates, "Comma-separated fabric IDs")->required();

  auto* select = app.add_subcommand("select", "Choose a fabric for a scenario");
  select->add_option("--scenario", o.scenario, "Scenario file")->required();
  select->add_option("--pipeline", o.pipeline, "comparator | symbolic")->capture_default_str();
  select->add_option("--predictor-accuracy", o.predictor_accuracy, "Symbolic level predictor accuracy")
      ->capture_default_str();

  auto* distill = app.add_subcommand("distill-build", "Build teacher explanation records for labeled pairs");
  distill->add_option("--pairs", o.pairs_file, "Pair file")->required();
  distill->add_option("--teacher-fixture", o.teacher_fixture, "Canned explanations (offline mode)");
  distill->add_flag("--mark-refined", o.mark_refined, "Mark every record expert_refined");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }

  try {
    if (gen_data->parsed()) return cmd_gen_data(o, out);
    if (gen_pairs->parsed()) return cmd_gen_pairs(o, out);
    if (eval->parsed()) return cmd_eval(o, out);
    if (rank->parsed()) return cmd_rank(o, out);
    if (select->parsed()) return cmd_select(o, out);
    if (distill->parsed()) return cmd_distill_build(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kConfigError;
}

}  // namespace fabsel::cli
