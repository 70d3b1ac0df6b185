#include "trex/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <set>
#include <tuple>

#include "CLI11.hpp"
#include "trex/auditor.hpp"
#include "trex/errors.hpp"
#include "trex/fixtures.hpp"
#include "trex/http_provider.hpp"
#include "trex/metrics.hpp"
#include "trex/oracles.hpp"
#include "trex/util.hpp"

namespace trex {

namespace {

namespace fs = std::filesystem;

nlohmann::json parse_json_file(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(path.string() + ": " + e.what());
  }
}

bool is_builtin_dataset(const std::string& name) {
  return name == "matres" || name == "tbdense" || name == "tddman";
}

// Where the corpus comes from and which schema reads it. The peeked JSON is
// kept so self-describing files parse once.
struct CorpusSource {
  fs::path path;
  CorpusFormat format = CorpusFormat::native_json;
  std::string dataset;
  nlohmann::json parsed;
  bool has_parsed = false;
};

CorpusSource resolve_corpus_source(const RunConfig& cfg) {
  auto fmt = corpus_format_from_name(cfg.format);
  if (!fmt) throw ConfigError("unknown corpus format \"" + cfg.format + "\"");
  CorpusSource src;
  src.format = *fmt;

  if (!cfg.corpus_path.empty()) {
    src.path = cfg.corpus_path;
  } else if (!cfg.dataset.empty() && !is_builtin_dataset(cfg.dataset)) {
    // a non-builtin --dataset doubles as a corpus path
    if (fs::exists(cfg.dataset)) {
      src.path = cfg.dataset;
    } else if (fs::exists(cfg.dataset + ".json")) {
      src.path = cfg.dataset + ".json";
    } else {
      throw ConfigError("dataset \"" + cfg.dataset +
                        "\" is neither a builtin name nor a readable corpus path");
    }
  }
  if (src.path.empty()) {
    throw ConfigError("no corpus: pass --corpus, or --dataset with a corpus path");
  }

  if (is_builtin_dataset(cfg.dataset)) {
    src.dataset = cfg.dataset;
  } else if (src.format == CorpusFormat::native_json) {
    src.parsed = parse_json_file(src.path);
    src.has_parsed = true;
    if (src.parsed.is_object() && src.parsed.contains("dataset")) {
      src.dataset = src.parsed.at("dataset").get<std::string>();
    }
    if (!is_builtin_dataset(src.dataset)) {
      throw ConfigError(src.path.string() +
                        " does not name its dataset; pass --dataset matres|tbdense|tddman");
    }
  } else {
    throw ConfigError("--dataset matres|tbdense|tddman required for format " + cfg.format);
  }
  return src;
}

Corpus load_corpus_from_source(CorpusSource src, const RunConfig& cfg) {
  RelationSchema schema = builtin_schema(src.dataset);
  if (!cfg.prompts_dir.empty()) load_prompt_overrides(schema, cfg.prompts_dir);

  Corpus corpus;
  if (src.format == CorpusFormat::native_json) {
    nlohmann::json j = src.has_parsed ? std::move(src.parsed) : parse_json_file(src.path);
    corpus = corpus_from_json(j, schema);
  } else {
    corpus = load_corpus(src.path, src.format, schema,
                         cfg.aux_path.empty() ? fs::path{} : fs::path(cfg.aux_path));
  }

  if (!cfg.docs.empty()) {
    std::set<std::string> keep(cfg.docs.begin(), cfg.docs.end());
    for (const auto& id : keep) {
      if (!corpus.documents.count(id)) throw ConfigError("doc \"" + id + "\" not in corpus");
    }
    std::erase_if(corpus.documents, [&](const auto& kv) { return !keep.count(kv.first); });
    std::erase_if(corpus.pairs, [&](const GoldPair& p) { return !keep.count(p.doc_id); });
  }
  return corpus;
}

}  // namespace

void RunConfig::apply_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "dataset",         "corpus",        "format",
      "aux",             "docs",          "strategy",
      "provider",        "model",         "base_url",
      "api_key_env",     "temperature",   "max_retries",
      "confusion",       "violation_rate", "commit_rate",
      "incorrect_rate",  "replay_run",    "seed",
      "max_context_sentences",            "tag_style",
      "conflict_threshold",               "cot_same_event_turn",
      "exclude_vague_overall",            "workers",
      "cache_dir",       "out",           "prompts_dir"};
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw ConfigError("config: unknown key \"" + key + "\"");
  }
  try {
    auto get = [&](const char* key, auto& slot) {
      if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
    };
    get("dataset", dataset);
    get("corpus", corpus_path);
    get("format", format);
    get("aux", aux_path);
    get("docs", docs);
    get("strategy", strategy);
    get("provider", provider);
    get("model", model);
    get("base_url", base_url);
    get("api_key_env", api_key_env);
    get("temperature", temperature);
    get("max_retries", max_retries);
    get("confusion", confusion_path);
    get("violation_rate", violation_rate);
    get("commit_rate", commit_rate);
    get("incorrect_rate", incorrect_rate);
    get("replay_run", replay_run);
    get("seed", seed);
    get("max_context_sentences", max_context_sentences);
    get("tag_style", tag_style);
    get("conflict_threshold", conflict_threshold);
    get("cot_same_event_turn", cot_same_event_turn);
    get("exclude_vague_overall", exclude_vague_overall);
    get("workers", workers);
    get("cache_dir", cache_dir);
    get("out", out);
    get("prompts_dir", prompts_dir);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

void RunConfig::apply_file(const std::filesystem::path& path) {
  apply_json(parse_json_file(path));
}

nlohmann::json RunConfig::to_json() const {
  return {{"dataset", dataset},
          {"corpus", corpus_path},
          {"format", format},
          {"aux", aux_path},
          {"docs", docs},
          {"strategy", strategy},
          {"provider", provider},
          {"model", model},
          {"base_url", base_url},
          {"api_key_env", api_key_env},
          {"temperature", temperature},
          {"max_retries", max_retries},
          {"confusion", confusion_path},
          {"violation_rate", violation_rate},
          {"commit_rate", commit_rate},
          {"incorrect_rate", incorrect_rate},
          {"replay_run", replay_run},
          {"seed", seed},
          {"max_context_sentences", max_context_sentences},
          {"tag_style", tag_style},
          {"conflict_threshold", conflict_threshold},
          {"cot_same_event_turn", cot_same_event_turn},
          {"exclude_vague_overall", exclude_vague_overall},
          {"workers", workers},
          {"cache_dir", cache_dir},
          {"out", out},
          {"prompts_dir", prompts_dir}};
}

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  RunConfig cfg;
  cfg.apply_json(j);
  return cfg;
}

StrategyOptions RunConfig::strategy_options() const {
  StrategyOptions o;
  if (tag_style == "bracket") {
    o.tag_style = TagStyle::bracket;
  } else if (tag_style == "angle") {
    o.tag_style = TagStyle::angle;
  } else {
    throw ConfigError("unknown tag style \"" + tag_style + "\" (expected bracket or angle)");
  }
  if (max_context_sentences < 0) throw ConfigError("max_context_sentences must be >= 0");
  o.max_context_sentences = max_context_sentences;
  if (conflict_threshold != 2 && conflict_threshold != 3) {
    throw ConfigError("conflict_threshold must be 2 or 3");
  }
  o.conflict_threshold = conflict_threshold;
  o.cot_same_event_turn = cot_same_event_turn;
  return o;
}

nlohmann::json RunManifest::to_json() const {
  return {{"run_id", run_id},
          {"dataset", dataset},
          {"strategy", strategy},
          {"provider", provider},
          {"provider_id", provider_id},
          {"model", model},
          {"seed", seed},
          {"schema_hash", schema_hash},
          {"prompt_hashes", prompt_hashes},
          {"started_at", started_at},
          {"finished_at", finished_at},
          {"total_pairs", total_pairs},
          {"failed_pairs", failed_pairs},
          {"failures", failures},
          {"status", status},
          {"config", config}};
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  try {
    m.run_id = j.at("run_id").get<std::string>();
    m.dataset = j.at("dataset").get<std::string>();
    m.strategy = j.at("strategy").get<std::string>();
    m.provider = j.at("provider").get<std::string>();
    m.provider_id = j.at("provider_id").get<std::string>();
    m.model = j.at("model").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.schema_hash = j.at("schema_hash").get<std::string>();
    m.prompt_hashes = j.at("prompt_hashes").get<std::map<std::string, std::string>>();
    m.started_at = j.at("started_at").get<std::string>();
    m.finished_at = j.at("finished_at").get<std::string>();
    m.total_pairs = j.at("total_pairs").get<long>();
    m.failed_pairs = j.at("failed_pairs").get<long>();
    m.failures = j.at("failures").get<std::vector<std::string>>();
    m.status = j.at("status").get<std::string>();
    m.config = j.at("config");
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("manifest: ") + e.what());
  }
  return m;
}

RunManifest load_manifest(const std::filesystem::path& run_dir) {
  auto path = run_dir / "manifest.json";
  if (!fs::exists(path)) throw ConfigError("no manifest.json in " + run_dir.string());
  return RunManifest::from_json(parse_json_file(path));
}

std::map<std::string, std::string> prompt_hashes(const RelationSchema& schema) {
  std::map<std::string, std::string> out;
  out["zero_shot"] = sha256_hex(schema.zero_shot_template);
  if (!schema.same_event_question.empty()) {
    out["same_event"] = sha256_hex(schema.same_event_question);
  }
  for (const auto& [r, text] : schema.question_phrasings) {
    out["ranking_" + std::string(rel_name(r))] = sha256_hex(text);
  }
  for (const auto& [r, text] : schema.cot_questions) {
    out["cot_" + std::string(rel_name(r))] = sha256_hex(text);
  }
  return out;
}

Corpus load_run_corpus(const RunConfig& cfg) {
  return load_corpus_from_source(resolve_corpus_source(cfg), cfg);
}

std::shared_ptr<Provider> make_provider(const RunConfig& cfg,
                                        std::shared_ptr<const Corpus> corpus) {
  const std::string& p = cfg.provider;
  if (p == "gold-oracle") return gold_oracle(std::move(corpus));
  if (p == "refusal-oracle") return refusal_oracle();
  if (p == "noisy-oracle") {
    if (cfg.confusion_path.empty()) throw ConfigError("noisy-oracle needs --confusion");
    nlohmann::json j = parse_json_file(cfg.confusion_path);
    if (!j.is_object()) throw ConfigError("confusion file must map gold labels to outcome rows");
    Confusion conf;
    try {
      for (const auto& [gold_name, row] : j.items()) {
        auto g = rel_from_name(gold_name);
        if (!g) throw ConfigError("confusion: unknown label \"" + gold_name + "\"");
        for (const auto& [out_name, prob] : row.items()) {
          auto o = rel_from_name(out_name);
          if (!o) throw ConfigError("confusion: unknown label \"" + out_name + "\"");
          conf[*g].push_back({*o, prob.get<double>()});
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("confusion: ") + e.what());
    }
    return noisy_oracle(std::move(corpus), std::move(conf), cfg.seed);
  }
  if (p == "inconsistent-oracle") {
    return inconsistent_oracle(std::move(corpus), cfg.violation_rate, cfg.seed, cfg.commit_rate,
                               cfg.incorrect_rate);
  }
  if (p == "replay") {
    if (cfg.replay_run.empty()) {
      throw ConfigError("provider replay needs --replay-run (or use the replay command)");
    }
    auto m = load_manifest(cfg.replay_run);
    return replay_provider(m.provider_id, m.model);
  }
  if (p == "http") {
    HttpProviderConfig hc;
    hc.base_url = cfg.base_url;
    if (!cfg.model.empty()) hc.model = cfg.model;
    hc.temperature = cfg.temperature;
    hc.max_retries = cfg.max_retries;
    if (const char* key = std::getenv(cfg.api_key_env.c_str())) hc.api_key = key;
    return live_http_provider(std::move(hc));
  }
  throw ConfigError("unknown provider \"" + p +
                    "\" (expected gold-oracle, noisy-oracle, refusal-oracle, "
                    "inconsistent-oracle, replay, or http)");
}

RunOutcome execute_run(const RunConfig& cfg) {
  if (cfg.out.empty()) throw ConfigError("run needs --out");
  if (cfg.workers < 1) throw ConfigError("workers must be >= 1");
  Strategy st = strategy_from_name(cfg.strategy);
  StrategyOptions opts = cfg.strategy_options();

  auto src = resolve_corpus_source(cfg);
  auto corpus = std::make_shared<Corpus>(load_corpus_from_source(src, cfg));
  auto provider = make_provider(cfg, corpus);

  fs::path run_dir = cfg.out;
  fs::create_directories(run_dir);
  GatewayOptions gw;
  if (!cfg.cache_dir.empty()) {
    gw.cache_dir = cfg.cache_dir;
  } else if (cfg.provider == "replay" && !cfg.replay_run.empty()) {
    gw.cache_dir = fs::path(cfg.replay_run) / "cache";
  } else {
    gw.cache_dir = run_dir / "cache";
  }
  gw.transcript_dir = run_dir / "transcripts";
  gw.write_cache = cfg.provider != "replay";
  Gateway gateway(provider, gw);

  // the manifest freezes resolved locations so score/audit/replay work from
  // any working directory
  RunConfig frozen = cfg;
  frozen.dataset = src.dataset;
  frozen.corpus_path = fs::absolute(src.path).lexically_normal().string();
  frozen.out = fs::absolute(run_dir).lexically_normal().string();
  frozen.cache_dir = fs::absolute(gw.cache_dir).lexically_normal().string();
  if (!frozen.prompts_dir.empty()) {
    frozen.prompts_dir = fs::absolute(frozen.prompts_dir).lexically_normal().string();
  }

  const std::string started_at = iso8601_now();
  const auto& pairs = corpus->pairs;
  std::vector<Prediction> predictions;

  if (st == Strategy::event_ranking) {
    std::vector<std::pair<std::string, std::string>> tasks;
    for (const auto& [doc_id, doc] : corpus->documents) {
      for (auto& anchor : ranking_anchors(*corpus, doc_id)) tasks.emplace_back(doc_id, anchor);
    }
    std::vector<RankingResult> rounds(tasks.size());
    parallel_for(tasks.size(), cfg.workers, [&](std::size_t i) {
      rounds[i] = run_event_ranking(gateway, *corpus, tasks[i].first, tasks[i].second, opts);
    });
    predictions = aggregate_event_ranking(rounds, pairs, corpus->schema, opts);
  } else {
    predictions.resize(pairs.size());
    parallel_for(pairs.size(), cfg.workers, [&](std::size_t i) {
      predictions[i] = st == Strategy::zero_shot ? run_zero_shot(gateway, *corpus, pairs[i], opts)
                                                 : run_cot(gateway, *corpus, pairs[i], opts);
    });
  }
  std::sort(predictions.begin(), predictions.end(), [](const Prediction& a, const Prediction& b) {
    return std::tie(a.doc_id, a.e1, a.e2) < std::tie(b.doc_id, b.e1, b.e2);
  });

  RunManifest m;
  m.dataset = src.dataset;
  m.strategy = strategy_name(st);
  m.provider = cfg.provider;
  m.provider_id = provider->id();
  m.model = provider->model();
  m.seed = cfg.seed;
  m.schema_hash = corpus->schema.content_hash();
  m.prompt_hashes = prompt_hashes(corpus->schema);
  m.started_at = started_at;
  m.finished_at = iso8601_now();
  m.total_pairs = static_cast<long>(predictions.size());
  for (const auto& p : predictions) {
    if (!p.failed) continue;
    ++m.failed_pairs;
    m.failures.push_back(p.doc_id + "/" + p.e1 + "/" + p.e2 + ": " + p.failure);
  }
  m.status = m.failed_pairs == 0 ? "complete" : "failed_pairs";
  m.run_id =
      sha256_hex(started_at + "|" + m.provider_id + "|" + m.model + "|" + frozen.out).substr(0, 12);
  m.config = frozen.to_json();

  nlohmann::json pred_json = nlohmann::json::array();
  for (const auto& p : predictions) pred_json.push_back(p.to_json());
  write_file_atomic(run_dir / "predictions.json", pred_json.dump(2) + "\n");
  write_file_atomic(run_dir / "manifest.json", m.to_json().dump(2) + "\n");

  return RunOutcome{run_dir, std::move(m), std::move(predictions), gateway.provider_calls(),
                    gateway.cache_hits()};
}

namespace {

int cmd_run(const RunConfig& cfg) {
  RunOutcome out = execute_run(cfg);
  std::cout << "run " << out.manifest.run_id << ": " << out.manifest.total_pairs << " pairs, "
            << out.manifest.failed_pairs << " failed, " << out.provider_calls
            << " provider calls, " << out.cache_hits << " cache hits -> "
            << out.run_dir.string() << "\n";
  for (const auto& f : out.manifest.failures) std::cout << "  failed " << f << "\n";
  return out.manifest.failed_pairs == 0 ? 0 : 1;
}

std::vector<Prediction> load_predictions(const fs::path& run_dir) {
  auto path = run_dir / "predictions.json";
  if (!fs::exists(path)) throw ConfigError("no predictions.json in " + run_dir.string());
  nlohmann::json j = parse_json_file(path);
  if (!j.is_array()) throw LoadError(path.string() + ": expected an array");
  std::vector<Prediction> preds;
  preds.reserve(j.size());
  for (const auto& pj : j) preds.push_back(Prediction::from_json(pj));
  return preds;
}

int cmd_score(const std::string& run_dir, const std::string& out_dir,
              std::optional<bool> include_vague) {
  RunManifest m = load_manifest(run_dir);
  RunConfig cfg = RunConfig::from_json(m.config);
  Corpus corpus = load_run_corpus(cfg);
  auto preds = load_predictions(run_dir);
  bool inc = include_vague ? *include_vague : !cfg.exclude_vague_overall;
  EvalReport report = score(preds, corpus.pairs, corpus.schema, inc);
  fs::path dest = out_dir.empty() ? fs::path(run_dir) : fs::path(out_dir);
  fs::create_directories(dest);
  write_file_atomic(dest / "report.json", report.to_json().dump(2) + "\n");
  write_file_atomic(dest / "report.txt", report.text_table());
  std::cout << report.text_table();
  return 0;
}

int cmd_replay(const std::string& run_dir, const std::string& out_dir) {
  RunManifest m = load_manifest(run_dir);
  RunConfig cfg = RunConfig::from_json(m.config);
  cfg.provider = "replay";
  cfg.replay_run = run_dir;
  cfg.out = out_dir.empty() ? (fs::path(run_dir) / "replay").string() : out_dir;
  RunOutcome res = execute_run(cfg);

  std::string original = read_file(fs::path(run_dir) / "predictions.json");
  std::string fresh = read_file(res.run_dir / "predictions.json");
  bool identical = original == fresh;
  std::cout << "replay " << m.run_id << ": "
            << (identical ? "predictions identical" : "PREDICTIONS DIFFER") << ", "
            << res.provider_calls << " provider calls, " << res.manifest.failed_pairs
            << " failed\n";
  return identical && res.provider_calls == 0 && res.manifest.failed_pairs == 0 ? 0 : 1;
}

// Smallest corpus whose audited surface is exactly n pairs. Inverse audits
// want dense within-document graphs; the followup probe wants disjoint pairs
// with a gold mix that keeps the commit synthesis feasible.
Corpus synthesize_audit_corpus(const std::string& mode, long n, const RunConfig& cfg) {
  FixtureSpec spec;
  spec.dataset = cfg.dataset.empty() ? (mode == "inverse" ? "tbdense" : "matres") : cfg.dataset;
  if (!is_builtin_dataset(spec.dataset)) {
    throw ConfigError("--n synthesis needs a builtin --dataset, got \"" + spec.dataset + "\"");
  }
  spec.seed = cfg.seed;
  auto event_id = [](int i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "e%03d", i);
    return std::string(buf);
  };
  long remaining = n;
  int doc_no = 0;
  while (remaining > 0) {
    FixtureDoc doc;
    char name[16];
    std::snprintf(name, sizeof(name), "audit%02d", doc_no++);
    doc.doc_id = name;
    if (mode == "inverse") {
      int k = 2;
      while (static_cast<long>(k) * (k - 1) / 2 < remaining && k < 45) ++k;
      for (int i = 0; i < k; ++i) doc.events.push_back(event_id(i));
      long take = std::min(remaining, static_cast<long>(k) * (k - 1) / 2);
      for (int i = 0; i < k && take > 0; ++i) {
        for (int j = i + 1; j < k && take > 0; ++j, --take) {
          doc.relations.push_back({event_id(i), event_id(j), Rel::before});
        }
      }
      remaining -= std::min(remaining, static_cast<long>(k) * (k - 1) / 2);
    } else {
      // the tail gold-matches the follow-up question so committing to it is
      // correct there; the split keeps the oracle's commit synthesis feasible
      long correct_tail = std::lround(static_cast<double>(n) * (1.0 - cfg.incorrect_rate));
      long take = std::min<long>(remaining, 30);
      long made = n - remaining;
      for (long i = 0; i < take; ++i) {
        auto a = event_id(static_cast<int>(2 * i));
        auto b = event_id(static_cast<int>(2 * i + 1));
        doc.events.push_back(a);
        doc.events.push_back(b);
        doc.relations.push_back({a, b, made + i < n - correct_tail ? Rel::before : Rel::after});
      }
      remaining -= take;
    }
    spec.documents.push_back(std::move(doc));
  }
  return generate_fixture(spec, cfg.seed);
}

int cmd_audit(const RunConfig& flags, const std::string& mode, long n, const std::string& run_dir,
              const std::string& out_dir) {
  if (mode != "inverse" && mode != "unknown-followup") {
    throw ConfigError("--mode must be inverse or unknown-followup");
  }
  RunConfig eff = flags;
  std::shared_ptr<Corpus> corpus;
  GatewayOptions gw;
  if (!run_dir.empty()) {
    RunManifest m = load_manifest(run_dir);
    eff = RunConfig::from_json(m.config);
    eff.workers = flags.workers;
    corpus = std::make_shared<Corpus>(load_run_corpus(eff));
    gw.cache_dir = eff.cache_dir;
    gw.write_cache = eff.provider != "replay";
  } else if (n > 0) {
    corpus = std::make_shared<Corpus>(synthesize_audit_corpus(mode, n, flags));
    if (!flags.cache_dir.empty()) gw.cache_dir = flags.cache_dir;
  } else {
    corpus = std::make_shared<Corpus>(load_run_corpus(flags));
    if (!flags.cache_dir.empty()) gw.cache_dir = flags.cache_dir;
  }
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    gw.transcript_dir = fs::path(out_dir) / "transcripts";
  }
  auto provider = make_provider(eff, corpus);
  Gateway gateway(provider, gw);
  StrategyOptions sopts = eff.strategy_options();
  AuditOptions aopts;

  AuditReport total;
  if (mode == "inverse") {
    for (const auto& [doc_id, doc] : corpus->documents) {
      auto anchors = ranking_anchors(*corpus, doc_id);
      if (anchors.empty()) continue;
      std::vector<RankingResult> rounds(anchors.size());
      parallel_for(anchors.size(), eff.workers, [&](std::size_t i) {
        rounds[i] = run_event_ranking(gateway, *corpus, doc_id, anchors[i], sopts);
      });
      std::vector<Assertion> pooled;
      for (auto& r : rounds) {
        pooled.insert(pooled.end(), r.assertions.begin(), r.assertions.end());
      }
      auto canonical = dedupe_assertions(pooled, corpus->schema);
      total.merge(audit_inverse(gateway, *corpus, doc_id, canonical, sopts, aopts),
                  aopts.max_examples);
    }
  } else {
    total = audit_unknown_followups(gateway, *corpus, corpus->pairs, sopts, aopts);
  }

  std::cout << total.text_table();
  if (!out_dir.empty()) {
    write_file_atomic(fs::path(out_dir) / "audit_report.json", total.to_json().dump(2) + "\n");
    write_file_atomic(fs::path(out_dir) / "audit_report.txt", total.text_table());
  }
  return 0;
}

int cmd_cache_stats(const std::string& dir) {
  if (!fs::is_directory(dir)) throw ConfigError("cache dir not found: " + dir);
  long entries = 0;
  std::uintmax_t bytes = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    ++entries;
    bytes += e.file_size();
  }
  std::cout << "cache " << dir << ": " << entries << " entries, " << bytes << " bytes\n";
  return 0;
}

int cmd_cache_gc(const std::string& dir, double older_days, bool all) {
  if (!fs::is_directory(dir)) throw ConfigError("cache dir not found: " + dir);
  if (!all && older_days <= 0) throw ConfigError("gc needs --older-than-days or --all");
  auto cutoff = fs::file_time_type::clock::now() -
                std::chrono::duration_cast<fs::file_time_type::duration>(
                    std::chrono::duration<double>(older_days * 86400.0));
  long removed = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().extension() != ".json") continue;
    if (all || e.last_write_time() < cutoff) {
      fs::remove(e.path());
      ++removed;
    }
  }
  std::cout << "removed " << removed << " cache entries\n";
  return 0;
}

int cmd_fixture_gen(const std::string& spec_path, bool has_seed, std::uint64_t seed,
                    const std::string& out_path) {
  FixtureSpec spec = load_fixture_spec(spec_path);
  Corpus corpus = has_seed ? generate_fixture(spec, seed) : generate_fixture(spec);
  fs::path out = out_path;
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  save_native_json(corpus, out);
  std::cout << "wrote " << out_path << ": " << corpus.documents.size() << " docs, "
            << corpus.pairs.size() << " pairs\n";
  return 0;
}

int cmd_prompts_export(const std::string& dataset, const std::string& out_dir,
                       const std::string& overrides_dir) {
  RelationSchema schema = builtin_schema(dataset);
  if (!overrides_dir.empty()) load_prompt_overrides(schema, overrides_dir);
  fs::create_directories(out_dir);
  export_prompts(schema, out_dir);
  std::cout << "exported " << prompt_hashes(schema).size() << " templates to " << out_dir << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"zero-shot temporal relation extraction harness"};
  app.require_subcommand(1);

  RunConfig cfg;
  try {
    // config files apply before flag parsing so explicit flags win
    for (int i = 1; i < argc; ++i) {
      std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc) {
        cfg.apply_file(argv[i + 1]);
      } else if (arg.rfind("--config=", 0) == 0) {
        cfg.apply_file(arg.substr(9));
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  std::string config_sink;
  auto add_corpus_flags = [&](CLI::App* c) {
    c->add_option("--config", config_sink, "JSON config file (applied before flags)");
    c->add_option("--dataset", cfg.dataset, "matres|tbdense|tddman, or a corpus path");
    c->add_option("--corpus", cfg.corpus_path, "corpus file");
    c->add_option("--format", cfg.format, "native_json|matres_tsv|tdd_tsv|timeml_xml");
    c->add_option("--aux", cfg.aux_path, "TimeML document dir for the tsv formats");
    c->add_option("--docs", cfg.docs, "keep only these doc ids")->delimiter(',');
    c->add_option("--prompts-dir", cfg.prompts_dir, "prompt template overrides");
  };
  auto add_provider_flags = [&](CLI::App* c) {
    c->add_option("--provider", cfg.provider,
                  "gold-oracle|noisy-oracle|refusal-oracle|inconsistent-oracle|replay|http");
    c->add_option("--model", cfg.model, "http model name");
    c->add_option("--base-url", cfg.base_url, "http endpoint, scheme://host[:port]");
    c->add_option("--api-key-env", cfg.api_key_env, "env var holding the bearer token");
    c->add_option("--temperature", cfg.temperature);
    c->add_option("--max-retries", cfg.max_retries);
    c->add_option("--confusion", cfg.confusion_path, "noisy-oracle confusion rows, JSON");
    c->add_option("--violation-rate", cfg.violation_rate, "inconsistent-oracle ranking corruption");
    c->add_option("--commit-rate", cfg.commit_rate);
    c->add_option("--incorrect-rate", cfg.incorrect_rate);
    c->add_option("--replay-run", cfg.replay_run, "recorded run dir for --provider replay");
    c->add_option("--seed", cfg.seed);
  };
  auto add_strategy_flags = [&](CLI::App* c) {
    c->add_option("--strategy", cfg.strategy, "zero-shot|event-ranking|cot");
    c->add_option("--max-context-sentences", cfg.max_context_sentences,
                  "ranking context budget; 0 sends whole documents");
    c->add_option("--tag-style", cfg.tag_style, "bracket|angle");
    c->add_option("--conflict-threshold", cfg.conflict_threshold,
                  "distinct labels per pair that count as a conflict (2 or 3)");
    c->add_flag(
        "--no-same-event-turn", [&](std::int64_t) { cfg.cot_same_event_turn = false; },
        "skip the coreference question");
    c->add_flag("--exclude-vague-overall", cfg.exclude_vague_overall,
                "drop vague pairs from the overall pool");
    c->add_option("--workers", cfg.workers);
    c->add_option("--cache-dir", cfg.cache_dir, "reply cache (default <out>/cache)");
  };

  auto* c_run = app.add_subcommand("run", "run a strategy over a corpus");
  add_corpus_flags(c_run);
  add_provider_flags(c_run);
  add_strategy_flags(c_run);
  c_run->add_option("--out", cfg.out, "run directory");

  std::string score_run, score_out;
  bool score_excl = false, score_incl = false;
  auto* c_score = app.add_subcommand("score", "score a recorded run against its gold pairs");
  c_score->add_option("--run", score_run, "run directory")->required();
  c_score->add_option("--out", score_out, "report directory (default the run dir)");
  c_score->add_flag("--exclude-vague-overall", score_excl);
  c_score->add_flag("--include-vague-overall", score_incl);

  std::string audit_mode = "inverse", audit_run, audit_out;
  long audit_n = 0;
  auto* c_audit = app.add_subcommand("audit", "temporal-consistency audits");
  c_audit->add_option("--mode", audit_mode, "inverse|unknown-followup");
  c_audit->add_option("--run", audit_run, "audit this recorded run's corpus through its cache");
  c_audit->add_option("--n", audit_n, "synthesize a calibration corpus of this many pairs");
  c_audit->add_option("--out", audit_out, "directory for audit_report.json and transcripts");
  add_corpus_flags(c_audit);
  add_provider_flags(c_audit);
  add_strategy_flags(c_audit);

  std::string replay_run_dir, replay_out;
  auto* c_replay = app.add_subcommand("replay", "re-run a recording; fails on any divergence");
  c_replay->add_option("--run", replay_run_dir, "run directory")->required();
  c_replay->add_option("--out", replay_out, "replay directory (default <run>/replay)");

  auto* c_cache = app.add_subcommand("cache", "reply cache maintenance");
  c_cache->require_subcommand(1);
  std::string cache_dir_arg;
  double gc_days = 0.0;
  bool gc_all = false;
  auto* c_stats = c_cache->add_subcommand("stats", "entry and byte counts");
  c_stats->add_option("--cache-dir", cache_dir_arg)->required();
  auto* c_gc = c_cache->add_subcommand("gc", "drop old entries");
  c_gc->add_option("--cache-dir", cache_dir_arg)->required();
  c_gc->add_option("--older-than-days", gc_days);
  c_gc->add_flag("--all", gc_all);

  auto* c_fixture = app.add_subcommand("fixture", "synthetic corpora");
  c_fixture->require_subcommand(1);
  std::string fix_spec, fix_out;
  std::uint64_t fix_seed = 0;
  auto* c_gen = c_fixture->add_subcommand("gen", "generate a corpus from a fixture spec");
  c_gen->add_option("--spec", fix_spec)->required();
  auto* fix_seed_opt = c_gen->add_option("--seed", fix_seed, "overrides the spec's seed");
  c_gen->add_option("--out", fix_out)->required();

  auto* c_prompts = app.add_subcommand("prompts", "prompt templates");
  c_prompts->require_subcommand(1);
  std::string prompts_dataset, prompts_out, prompts_overrides;
  auto* c_export = c_prompts->add_subcommand("export", "write builtin templates to files");
  c_export->add_option("--dataset", prompts_dataset)->required();
  c_export->add_option("--out-dir", prompts_out)->required();
  c_export->add_option("--prompts-dir", prompts_overrides, "overrides to apply first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (c_run->parsed()) return cmd_run(cfg);
    if (c_score->parsed()) {
      if (score_excl && score_incl) {
        throw ConfigError("pass at most one of --exclude-vague-overall/--include-vague-overall");
      }
      std::optional<bool> include_vague;
      if (score_excl) include_vague = false;
      if (score_incl) include_vague = true;
      return cmd_score(score_run, score_out, include_vague);
    }
    if (c_audit->parsed()) {
      // synthesized graphs are denser than any window; audit whole documents
      // unless the budget was asked for explicitly
      if (audit_n > 0 && c_audit->get_option("--max-context-sentences")->count() == 0) {
        cfg.max_context_sentences = 0;
      }
      return cmd_audit(cfg, audit_mode, audit_n, audit_run, audit_out);
    }
    if (c_replay->parsed()) return cmd_replay(replay_run_dir, replay_out);
    if (c_stats->parsed()) return cmd_cache_stats(cache_dir_arg);
    if (c_gc->parsed()) return cmd_cache_gc(cache_dir_arg, gc_days, gc_all);
    if (c_gen->parsed()) return cmd_fixture_gen(fix_spec, fix_seed_opt->count() > 0, fix_seed, fix_out);
    if (c_export->parsed()) return cmd_prompts_export(prompts_dataset, prompts_out, prompts_overrides);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace trex
