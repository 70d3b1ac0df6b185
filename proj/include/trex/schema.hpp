#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace trex {

// Closed label set. Dataset schemas pick a subset; anything else is rejected
// at load time.
enum class Rel {
  before,
  after,
  equal,
  simultaneous,
  include,
  is_included,
  vague,
};

// Canonical identifier, e.g. "is_included".
std::string_view rel_name(Rel r);
// Prompt/report form, e.g. "is included".
std::string_view rel_display(Rel r);
std::optional<Rel> rel_from_name(std::string_view name);

// A dataset's label set plus everything needed to phrase and orient queries
// about it. Immutable once built; safe to share across workers.
struct RelationSchema {
  std::string dataset_name;

  // Gold label list in recitation order. For datasets whose gold set lacks
  // vague, vague is still part of the output space (see output_space()).
  std::vector<Rel> labels;

  // Involutive inverse over the output space.
  std::map<Rel, Rel> inverse;

  // Labels with an event-ranking question, in recitation order.
  std::vector<Rel> queryable;

  // Event-ranking question per queryable label. Placeholders: {document},
  // {anchor}, {tag_example}.
  std::map<Rel, std::string> question_phrasings;

  // Yes/no question per label that has one. Placeholders: {e1}, {e2}.
  std::map<Rel, std::string> cot_questions;

  // First turn of the chain-of-thought session. Placeholders: {document},
  // {e1}, {e2}.
  std::string same_event_question;

  // Single-turn prompt. Placeholders: {document}, {relation_list}, {e1},
  // {e2}, {tag_example}.
  std::string zero_shot_template;

  // Labels recited in the zero-shot relation list. Defaults to `labels`;
  // some datasets keep vague out of the recited list and rely on the
  // "answer vague if unsure" instruction instead.
  std::vector<Rel> recited;

  // Normalizer extensions.
  std::vector<std::string> extra_refusal_phrases;
  std::map<Rel, std::vector<std::string>> synonyms;

  bool vague_in_gold() const;
  std::vector<Rel> output_space() const;
  bool in_output_space(Rel r) const;
  Rel inverse_of(Rel r) const;

  // Yes/no questioning order: recitation order with vague moved last.
  std::vector<Rel> cot_order() const;

  // "[before, after, vague, equal]"
  std::string relation_list_text() const;

  void validate() const;

  nlohmann::json to_json() const;
  static RelationSchema from_json(const nlohmann::json& j);

  // Hash of the canonical JSON form; recorded in run manifests.
  std::string content_hash() const;
};

// Built-in schemas: "matres", "tbdense", "tddman".
RelationSchema builtin_schema(const std::string& dataset_name);

// JSON override file; validates all invariants.
RelationSchema load_schema_file(const std::filesystem::path& path);

// Prompt templates ship as plain-text files, one per query, so they can be
// inspected or swapped without rebuilding: zero_shot.txt, same_event.txt,
// ranking_<label>.txt, cot_<label>.txt.
void export_prompts(const RelationSchema& schema, const std::filesystem::path& dir);

// Replaces templates with the contents of any matching files under dir.
// Missing files keep the built-in text.
void load_prompt_overrides(RelationSchema& schema, const std::filesystem::path& dir);

// Maps an (anchor, r, other) assertion onto the ordered target pair.
Rel orient(const RelationSchema& schema, std::string_view anchor, Rel r, std::string_view other,
           std::string_view e1, std::string_view e2);

// Declared answer semantics of the ranking question for relation r: an event
// a listed under question r asserts (a, ranking_answer_relation(r), anchor).
// "which events were included in X?" lists events inside X, so the include
// question answers is_included; before/after/equal/simultaneous answer
// themselves.
Rel ranking_answer_relation(Rel question_relation);

}  // namespace trex
