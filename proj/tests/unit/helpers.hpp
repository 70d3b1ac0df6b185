#pragma once

#include <memory>

#include "trex/corpus.hpp"

namespace trex::testing {

// Four sentences, four triggers, labels covering both orientations plus a
// vague pair. e1 started / e2 intensified / e3 ended / e4 began.
inline std::shared_ptr<Corpus> small_tbdense_corpus() {
  auto corpus = std::make_shared<Corpus>();
  corpus->dataset_name = "tbdense";
  corpus->schema = builtin_schema("tbdense");
  Document doc;
  doc.doc_id = "war01";
  doc.text =
      "The war started in March. Fighting intensified in April. "
      "The war ended in June. Peace talks began in July.";
  doc.sentence_spans = {{0, 25}, {26, 56}, {57, 79}, {80, 106}};
  auto add = [&](const char* id, const char* surface, int sentence) {
    const auto& s = doc.sentence_spans[sentence];
    auto pos = doc.text.find(surface, s.begin);
    doc.triggers.push_back(
        {id, surface, {pos, pos + std::string(surface).size()}, sentence});
  };
  add("e1", "started", 0);
  add("e2", "intensified", 1);
  add("e3", "ended", 2);
  add("e4", "began", 3);
  doc.validate();
  corpus->documents["war01"] = doc;
  corpus->pairs = {
      {"war01", "e1", "e2", Rel::before},
      {"war01", "e2", "e3", Rel::before},
      {"war01", "e1", "e3", Rel::vague},
      {"war01", "e4", "e3", Rel::after},
  };
  corpus->validate();
  return corpus;
}

// Two triggers marked coreferent ("started"/"ended" of one season event)
// plus a third; matres labels.
inline std::shared_ptr<Corpus> coref_matres_corpus() {
  auto corpus = std::make_shared<Corpus>();
  corpus->dataset_name = "matres";
  corpus->schema = builtin_schema("matres");
  Document doc;
  doc.doc_id = "season01";
  doc.text = "The season started in May. It ended in August. Fans celebrated.";
  doc.sentence_spans = {{0, 26}, {27, 46}, {47, 63}};
  doc.triggers = {
      {"e1", "started", {11, 18}, 0},
      {"e2", "ended", {30, 35}, 1},
      {"e3", "celebrated", {52, 62}, 2},
  };
  doc.coreferent = {{"e1", "e2"}};
  doc.validate();
  corpus->documents["season01"] = doc;
  corpus->pairs = {
      {"season01", "e1", "e2", Rel::before},
      {"season01", "e1", "e3", Rel::before},
      {"season01", "e3", "e2", Rel::after},
  };
  corpus->validate();
  return corpus;
}

// One sentence per trigger, ids double as surfaces ("p0", "p1", ...).
inline Corpus line_corpus(const std::string& dataset, int triggers,
                          std::vector<GoldPair> pairs) {
  Corpus corpus;
  corpus.dataset_name = dataset;
  corpus.schema = builtin_schema(dataset);
  Document doc;
  doc.doc_id = "d1";
  for (int i = 0; i < triggers; ++i) {
    std::string id = "p" + std::to_string(i);
    std::string sentence = "Phase " + id + " unfolded.";
    std::size_t start = doc.text.empty() ? 0 : doc.text.size() + 1;
    if (!doc.text.empty()) doc.text += " ";
    doc.text += sentence;
    doc.sentence_spans.push_back({start, start + sentence.size()});
    std::size_t at = start + 6;
    doc.triggers.push_back({id, id, {at, at + id.size()}, i});
  }
  doc.validate();
  corpus.documents["d1"] = doc;
  corpus.pairs = std::move(pairs);
  corpus.validate();
  return corpus;
}

}  // namespace trex::testing
