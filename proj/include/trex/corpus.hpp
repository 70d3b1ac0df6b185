#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "trex/schema.hpp"

namespace trex {

enum class TagStyle { bracket, angle };

struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // half-open
  bool operator==(const CharSpan&) const = default;
};

struct EventTrigger {
  std::string id;
  std::string surface;
  CharSpan span;
  int sentence_index = -1;
};

struct Document {
  std::string doc_id;
  std::string text;
  std::vector<CharSpan> sentence_spans;
  std::vector<EventTrigger> triggers;
  // Trigger-id pairs annotated as mentions of one event; drives the
  // same-event branch of the simulated oracles.
  std::vector<std::pair<std::string, std::string>> coreferent;

  const EventTrigger* find_trigger(const std::string& trigger_id) const;
  std::string sentence_text(int index) const;
  bool coreferent_pair(const std::string& a, const std::string& b) const;
  void validate() const;
};

struct GoldPair {
  std::string doc_id;
  std::string e1;
  std::string e2;
  Rel label;
};

struct Corpus {
  std::string dataset_name;
  RelationSchema schema;
  std::map<std::string, Document> documents;
  std::vector<GoldPair> pairs;

  const Document& document(const std::string& doc_id) const;
  void validate() const;
};

enum class CorpusFormat { native_json, matres_tsv, tdd_tsv, timeml_xml };

std::optional<CorpusFormat> corpus_format_from_name(const std::string& name);
std::string corpus_format_name(CorpusFormat format);

// For matres_tsv/tdd_tsv the pair file references documents supplied
// separately; pass the directory holding their TimeML sources as aux_path.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const RelationSchema& schema,
                   const std::filesystem::path& aux_path = {});

// Canonical interchange form: {"dataset": ..., "documents": [...]} with one
// object per document. A bare document array also loads (schema names the
// dataset then).
Corpus load_native_json(const std::filesystem::path& path, const RelationSchema& schema);
void save_native_json(const Corpus& corpus, const std::filesystem::path& path);
nlohmann::json corpus_to_json(const Corpus& corpus);
Corpus corpus_from_json(const nlohmann::json& j, const RelationSchema& schema);

// Wraps each selected trigger in open/close tags carrying the trigger id,
// e.g. "[EVENT e3]started[/EVENT e3]". All other characters pass through.
std::string mark_events(const Document& doc, TagStyle style,
                        const std::set<std::string>* subset = nullptr);

// Inverse of mark_events for both tag styles.
std::string strip_event_tags(const std::string& marked);

// "[EVENT e3]started[/EVENT e3]" for a single trigger reference in a prompt.
std::string tagged_trigger(const EventTrigger& trigger, TagStyle style);
// "[EVENT][/EVENT]" / "<EVENT></EVENT>": the label example recited in prompts.
std::string tag_example(TagStyle style);

struct WindowResult {
  Document document;
  bool truncated = false;
  std::vector<int> kept_sentences;  // original sentence indices, ascending
};

// Restricts doc to at most max_sentences sentences around the anchors,
// expanding alternately on both sides; anchors are always kept. Non-anchor
// triggers outside the window are dropped and spans re-based.
WindowResult context_window(const Document& doc, const std::set<std::string>& anchors,
                            int max_sentences = 8);

}  // namespace trex
