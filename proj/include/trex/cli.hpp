#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "trex/corpus.hpp"
#include "trex/gateway.hpp"
#include "trex/strategies.hpp"

namespace trex {

// Effective settings for one command. Precedence: built-in defaults, then a
// --config JSON file, then explicit flags.
struct RunConfig {
  std::string dataset;            // builtin name, or a path to a native corpus
  std::string corpus_path;        // explicit corpus file; wins over the path form above
  std::string format = "native_json";
  std::string aux_path;           // TimeML document dir for the tsv formats
  std::vector<std::string> docs;  // keep only these doc ids

  std::string strategy = "zero-shot";

  std::string provider = "gold-oracle";
  std::string model;              // http model name
  std::string base_url;
  std::string api_key_env = "TREX_API_KEY";
  double temperature = 0.0;
  int max_retries = 3;
  std::string confusion_path;     // noisy-oracle rows, JSON
  double violation_rate = 0.0;    // inconsistent-oracle knobs
  double commit_rate = 0.84;
  double incorrect_rate = 0.96;
  std::string replay_run;         // recorded run dir for --provider replay

  std::uint64_t seed = 0;
  int max_context_sentences = 8;
  std::string tag_style = "bracket";
  int conflict_threshold = 2;
  bool cot_same_event_turn = true;
  bool exclude_vague_overall = false;
  int workers = 1;

  std::string cache_dir;          // default <out>/cache
  std::string out;                // run directory
  std::string prompts_dir;        // prompt template overrides

  void apply_json(const nlohmann::json& j);
  void apply_file(const std::filesystem::path& path);
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& j);

  StrategyOptions strategy_options() const;
};

struct RunManifest {
  std::string run_id;
  std::string dataset;
  std::string strategy;
  std::string provider;           // spec string ("gold-oracle", "http", ...)
  std::string provider_id;        // Provider::id()
  std::string model;              // Provider::model()
  std::uint64_t seed = 0;
  std::string schema_hash;
  std::map<std::string, std::string> prompt_hashes;
  std::string started_at;
  std::string finished_at;
  long total_pairs = 0;
  long failed_pairs = 0;
  std::vector<std::string> failures;  // "doc/e1/e2: message"
  std::string status = "complete";
  nlohmann::json config;          // the frozen effective RunConfig

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

RunManifest load_manifest(const std::filesystem::path& run_dir);

// sha256 per exported template file name (zero_shot, ranking_before, ...).
std::map<std::string, std::string> prompt_hashes(const RelationSchema& schema);

// Resolves dataset/corpus/format/docs/prompts-dir into a loaded corpus.
Corpus load_run_corpus(const RunConfig& cfg);

std::shared_ptr<Provider> make_provider(const RunConfig& cfg,
                                        std::shared_ptr<const Corpus> corpus);

struct RunOutcome {
  std::filesystem::path run_dir;
  RunManifest manifest;
  std::vector<Prediction> predictions;
  std::uint64_t provider_calls = 0;
  std::uint64_t cache_hits = 0;
};

// Runs the configured strategy over every gold pair and writes the run
// directory: manifest.json, predictions.json, transcripts/, cache/.
RunOutcome execute_run(const RunConfig& cfg);

int run_cli(int argc, const char* const* argv);

}  // namespace trex
