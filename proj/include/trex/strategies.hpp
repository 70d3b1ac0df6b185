#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "trex/corpus.hpp"
#include "trex/gateway.hpp"
#include "trex/schema.hpp"

namespace trex {

enum class Strategy { zero_shot, event_ranking, cot };

std::string strategy_name(Strategy s);
Strategy strategy_from_name(const std::string& name);

// A directed claim extracted from one event-ranking answer. The subject and
// object follow the question's own phrasing: "happened before {anchor}"
// claims (answer, before, anchor) while the include-family questions claim
// (anchor, relation, answer).
struct Assertion {
  std::string anchor;
  Rel relation = Rel::vague;
  std::string other;
  std::string source;  // content hash of the transcript that produced it

  nlohmann::json to_json() const;
  static Assertion from_json(const nlohmann::json& j);
};

struct Prediction {
  std::string doc_id;
  std::string e1;
  std::string e2;
  Rel label = Rel::vague;
  Strategy strategy = Strategy::zero_shot;
  std::vector<std::string> transcripts;
  bool truncated_context = false;
  bool conflict_vague = false;
  bool undetected_vague = false;
  bool abstain_vague = false;
  bool same_event = false;
  bool failed = false;
  std::string failure;

  nlohmann::json to_json() const;
  static Prediction from_json(const nlohmann::json& j);
};

struct StrategyOptions {
  TagStyle tag_style = TagStyle::bracket;
  // Event-ranking context budget in sentences; 0 sends the whole document.
  int max_context_sentences = 8;
  // Distinct oriented labels on one pair that count as a conflict.
  int conflict_threshold = 2;
  // Ask the same-event question before the relation questions.
  bool cot_same_event_turn = true;
};

// Everything one anchor's round of ranking questions produced.
struct RankingResult {
  std::string doc_id;
  std::string anchor;
  std::vector<Assertion> assertions;
  std::vector<std::string> transcripts;
  bool truncated = false;
  bool failed = false;
  std::string failure;
};

// Substitutes {name} placeholders and, for angle style, rewrites the literal
// bracket tag mention templates carry.
std::string render_prompt(const std::string& tpl,
                          const std::map<std::string, std::string>& values,
                          TagStyle style);

Prediction run_zero_shot(Gateway& gateway, const Corpus& corpus, const GoldPair& pair,
                         const StrategyOptions& opts = {});

// Triggers of the document that appear in at least one gold pair, in
// document order.
std::vector<std::string> ranking_anchors(const Corpus& corpus, const std::string& doc_id);

RankingResult run_event_ranking(Gateway& gateway, const Corpus& corpus,
                                const std::string& doc_id, const std::string& anchor,
                                const StrategyOptions& opts = {});

// Pure fold: one Prediction per gold pair from the pooled assertions.
std::vector<Prediction> aggregate_event_ranking(const std::vector<Assertion>& assertions,
                                                const std::vector<GoldPair>& gold_pairs,
                                                const RelationSchema& schema,
                                                const StrategyOptions& opts = {});

// Convenience overload that also folds per-anchor truncation and failure
// marks into the pair predictions.
std::vector<Prediction> aggregate_event_ranking(const std::vector<RankingResult>& rounds,
                                                const std::vector<GoldPair>& gold_pairs,
                                                const RelationSchema& schema,
                                                const StrategyOptions& opts = {});

Prediction run_cot(Gateway& gateway, const Corpus& corpus, const GoldPair& pair,
                   const StrategyOptions& opts = {});

}  // namespace trex
