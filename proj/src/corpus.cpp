#include "trex/corpus.hpp"

#include <algorithm>

#include "trex/errors.hpp"
#include "trex/formats.hpp"
#include "trex/util.hpp"

namespace trex {
namespace {

std::string open_tag(const std::string& id, TagStyle style) {
  if (style == TagStyle::bracket) return id.empty() ? "[EVENT]" : "[EVENT " + id + "]";
  return id.empty() ? "<EVENT>" : "<EVENT " + id + ">";
}

std::string close_tag(const std::string& id, TagStyle style) {
  if (style == TagStyle::bracket) return id.empty() ? "[/EVENT]" : "[/EVENT " + id + "]";
  return id.empty() ? "</EVENT>" : "</EVENT " + id + ">";
}

}  // namespace

const EventTrigger* Document::find_trigger(const std::string& trigger_id) const {
  for (const auto& t : triggers) {
    if (t.id == trigger_id) return &t;
  }
  return nullptr;
}

std::string Document::sentence_text(int index) const {
  if (index < 0 || index >= static_cast<int>(sentence_spans.size())) {
    throw LoadError("sentence index out of range in document " + doc_id);
  }
  const auto& s = sentence_spans[index];
  return text.substr(s.begin, s.end - s.begin);
}

bool Document::coreferent_pair(const std::string& a, const std::string& b) const {
  for (const auto& [x, y] : coreferent) {
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

void Document::validate() const {
  if (doc_id.empty()) throw LoadError("document with empty doc_id");
  for (std::size_t i = 0; i < sentence_spans.size(); ++i) {
    const auto& s = sentence_spans[i];
    if (s.end < s.begin || s.end > text.size()) {
      throw LoadError("sentence span out of bounds in document " + doc_id);
    }
    if (i > 0 && s.begin < sentence_spans[i - 1].end) {
      throw LoadError("sentence spans overlap or are unordered in document " + doc_id);
    }
  }
  std::set<std::string> seen;
  for (const auto& t : triggers) {
    if (t.id.empty()) throw LoadError("trigger with empty id in document " + doc_id);
    if (!seen.insert(t.id).second) {
      throw LoadError("duplicate trigger id " + t.id + " in document " + doc_id);
    }
    if (t.span.end <= t.span.begin || t.span.end > text.size()) {
      throw LoadError("trigger " + t.id + " span out of bounds in document " + doc_id);
    }
    if (text.substr(t.span.begin, t.span.end - t.span.begin) != t.surface) {
      throw LoadError("trigger " + t.id + " surface mismatch in document " + doc_id);
    }
    if (t.sentence_index < 0 || t.sentence_index >= static_cast<int>(sentence_spans.size())) {
      throw LoadError("trigger " + t.id + " has no sentence in document " + doc_id);
    }
    const auto& s = sentence_spans[t.sentence_index];
    if (t.span.begin < s.begin || t.span.end > s.end) {
      throw LoadError("trigger " + t.id + " not covered by its sentence in document " + doc_id);
    }
  }
  for (const auto& [a, b] : coreferent) {
    if (!find_trigger(a) || !find_trigger(b)) {
      throw LoadError("coreferent pair references unknown trigger in document " + doc_id);
    }
  }
}

const Document& Corpus::document(const std::string& doc_id) const {
  auto it = documents.find(doc_id);
  if (it == documents.end()) throw LoadError("unknown document " + doc_id);
  return it->second;
}

void Corpus::validate() const {
  schema.validate();
  std::set<Rel> gold(schema.labels.begin(), schema.labels.end());
  for (const auto& [id, doc] : documents) {
    if (id != doc.doc_id) throw LoadError("document key/id mismatch for " + id);
    doc.validate();
  }
  for (const auto& p : pairs) {
    const auto& doc = document(p.doc_id);
    if (p.e1 == p.e2) {
      throw LoadError("pair with identical triggers " + p.e1 + " in document " + p.doc_id);
    }
    if (!doc.find_trigger(p.e1)) {
      throw LoadError("pair references unknown trigger " + p.e1 + " in document " + p.doc_id);
    }
    if (!doc.find_trigger(p.e2)) {
      throw LoadError("pair references unknown trigger " + p.e2 + " in document " + p.doc_id);
    }
    if (!gold.count(p.label)) {
      throw LoadError("pair label " + std::string(rel_name(p.label)) +
                      " outside gold label set in document " + p.doc_id);
    }
  }
}

std::optional<CorpusFormat> corpus_format_from_name(const std::string& name) {
  if (name == "native_json") return CorpusFormat::native_json;
  if (name == "matres_tsv") return CorpusFormat::matres_tsv;
  if (name == "tdd_tsv") return CorpusFormat::tdd_tsv;
  if (name == "timeml_xml") return CorpusFormat::timeml_xml;
  return std::nullopt;
}

std::string corpus_format_name(CorpusFormat format) {
  switch (format) {
    case CorpusFormat::native_json: return "native_json";
    case CorpusFormat::matres_tsv: return "matres_tsv";
    case CorpusFormat::tdd_tsv: return "tdd_tsv";
    case CorpusFormat::timeml_xml: return "timeml_xml";
  }
  throw ConfigError("bad corpus format value");
}

nlohmann::json corpus_to_json(const Corpus& corpus) {
  auto docs = nlohmann::json::array();
  // group pairs by document, preserving order within each
  std::map<std::string, std::vector<const GoldPair*>> by_doc;
  for (const auto& p : corpus.pairs) by_doc[p.doc_id].push_back(&p);
  for (const auto& [doc_id, doc] : corpus.documents) {
    nlohmann::json d;
    d["doc_id"] = doc.doc_id;
    d["text"] = doc.text;
    auto sentences = nlohmann::json::array();
    for (const auto& s : doc.sentence_spans) sentences.push_back({s.begin, s.end});
    d["sentences"] = sentences;
    auto triggers = nlohmann::json::array();
    for (const auto& t : doc.triggers) {
      triggers.push_back({{"id", t.id}, {"surface", t.surface}, {"start", t.span.begin}, {"end", t.span.end}});
    }
    d["triggers"] = triggers;
    auto pairs = nlohmann::json::array();
    for (const GoldPair* p : by_doc[doc_id]) {
      pairs.push_back({{"e1", p->e1}, {"e2", p->e2}, {"label", std::string(rel_name(p->label))}});
    }
    d["pairs"] = pairs;
    if (!doc.coreferent.empty()) {
      auto coref = nlohmann::json::array();
      for (const auto& [a, b] : doc.coreferent) coref.push_back({a, b});
      d["coreferent"] = coref;
    }
    docs.push_back(std::move(d));
  }
  return {{"dataset", corpus.dataset_name}, {"documents", std::move(docs)}};
}

Corpus corpus_from_json(const nlohmann::json& j, const RelationSchema& schema) {
  const nlohmann::json* docs = &j;
  if (j.is_object() && j.contains("documents")) {
    if (j.contains("dataset") && j.at("dataset").get<std::string>() != schema.dataset_name) {
      throw LoadError("corpus declares dataset " + j.at("dataset").get<std::string>() +
                      " but was loaded with the " + schema.dataset_name + " schema");
    }
    docs = &j.at("documents");
  }
  if (!docs->is_array()) throw LoadError("native corpus JSON must be an array of documents");
  Corpus corpus;
  corpus.dataset_name = schema.dataset_name;
  corpus.schema = schema;
  std::size_t doc_pos = 0;
  for (const auto& d : *docs) {
    doc_pos++;
    if (!d.is_object() || !d.contains("doc_id") || !d.contains("text")) {
      throw LoadError("document #" + std::to_string(doc_pos) + " missing doc_id or text");
    }
    Document doc;
    doc.doc_id = d.at("doc_id").get<std::string>();
    doc.text = d.at("text").get<std::string>();
    if (d.contains("sentences")) {
      for (const auto& s : d.at("sentences")) {
        if (!s.is_array() || s.size() != 2) {
          throw LoadError("bad sentence span in document " + doc.doc_id);
        }
        doc.sentence_spans.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>()});
      }
    } else {
      doc.sentence_spans.push_back({0, doc.text.size()});
    }
    if (d.contains("triggers")) {
      for (const auto& t : d.at("triggers")) {
        EventTrigger trig;
        trig.id = t.at("id").get<std::string>();
        trig.surface = t.at("surface").get<std::string>();
        trig.span = {t.at("start").get<std::size_t>(), t.at("end").get<std::size_t>()};
        for (std::size_t i = 0; i < doc.sentence_spans.size(); ++i) {
          const auto& s = doc.sentence_spans[i];
          if (trig.span.begin >= s.begin && trig.span.end <= s.end) {
            trig.sentence_index = static_cast<int>(i);
            break;
          }
        }
        doc.triggers.push_back(std::move(trig));
      }
    }
    if (d.contains("coreferent")) {
      for (const auto& c : d.at("coreferent")) {
        if (!c.is_array() || c.size() != 2) {
          throw LoadError("bad coreferent entry in document " + doc.doc_id);
        }
        doc.coreferent.emplace_back(c[0].get<std::string>(), c[1].get<std::string>());
      }
    }
    if (d.contains("pairs")) {
      std::size_t pair_pos = 0;
      for (const auto& p : d.at("pairs")) {
        pair_pos++;
        if (!p.contains("e1") || !p.contains("e2") || !p.contains("label")) {
          throw LoadError("document " + doc.doc_id + " pair #" + std::to_string(pair_pos) +
                          " missing e1/e2/label");
        }
        auto label = rel_from_name(p.at("label").get<std::string>());
        if (!label) {
          throw LoadError("document " + doc.doc_id + " pair #" + std::to_string(pair_pos) +
                          " has unknown label \"" + p.at("label").get<std::string>() + "\"");
        }
        corpus.pairs.push_back(
            {doc.doc_id, p.at("e1").get<std::string>(), p.at("e2").get<std::string>(), *label});
      }
    }
    if (corpus.documents.count(doc.doc_id)) {
      throw LoadError("duplicate document id " + doc.doc_id);
    }
    corpus.documents[doc.doc_id] = std::move(doc);
  }
  corpus.validate();
  return corpus;
}

Corpus load_native_json(const std::filesystem::path& path, const RelationSchema& schema) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("cannot parse corpus file " + path.string() + ": " + e.what());
  }
  return corpus_from_json(j, schema);
}

void save_native_json(const Corpus& corpus, const std::filesystem::path& path) {
  write_file(path, corpus_to_json(corpus).dump(2) + "\n");
}

std::string tag_example(TagStyle style) {
  return open_tag("", style) + close_tag("", style);
}

std::string tagged_trigger(const EventTrigger& trigger, TagStyle style) {
  return open_tag(trigger.id, style) + trigger.surface + close_tag(trigger.id, style);
}

std::string mark_events(const Document& doc, TagStyle style, const std::set<std::string>* subset) {
  std::vector<const EventTrigger*> selected;
  if (subset) {
    for (const auto& id : *subset) {
      const EventTrigger* t = doc.find_trigger(id);
      if (!t) throw MarkingError("unknown trigger " + id + " in document " + doc.doc_id);
      selected.push_back(t);
    }
  } else {
    for (const auto& t : doc.triggers) selected.push_back(&t);
  }
  std::sort(selected.begin(), selected.end(),
            [](const EventTrigger* a, const EventTrigger* b) { return a->span.begin < b->span.begin; });
  for (std::size_t i = 1; i < selected.size(); ++i) {
    if (selected[i]->span.begin < selected[i - 1]->span.end) {
      throw MarkingError("overlapping trigger spans " + selected[i - 1]->id + "/" + selected[i]->id +
                         " in document " + doc.doc_id);
    }
  }
  std::string out;
  out.reserve(doc.text.size() + selected.size() * 24);
  std::size_t cursor = 0;
  for (const EventTrigger* t : selected) {
    out.append(doc.text, cursor, t->span.begin - cursor);
    out += open_tag(t->id, style);
    out.append(doc.text, t->span.begin, t->span.end - t->span.begin);
    out += close_tag(t->id, style);
    cursor = t->span.end;
  }
  out.append(doc.text, cursor, doc.text.size() - cursor);
  return out;
}

std::string strip_event_tags(const std::string& marked) {
  std::string out;
  out.reserve(marked.size());
  std::size_t i = 0;
  while (i < marked.size()) {
    char c = marked[i];
    if (c == '[' || c == '<') {
      char closer = (c == '[') ? ']' : '>';
      std::size_t j = i + 1;
      if (j < marked.size() && marked[j] == '/') j++;
      if (marked.compare(j, 5, "EVENT") == 0) {
        std::size_t end = marked.find(closer, j + 5);
        if (end != std::string::npos) {
          // tag body may only hold an optional " id" part
          std::string body = marked.substr(j + 5, end - (j + 5));
          if (body.empty() || body[0] == ' ') {
            i = end + 1;
            continue;
          }
        }
      }
    }
    out += c;
    i++;
  }
  return out;
}

WindowResult context_window(const Document& doc, const std::set<std::string>& anchors,
                            int max_sentences) {
  if (max_sentences < 1) throw ConfigError("max_sentences must be at least 1");
  if (anchors.empty()) throw MarkingError("context window needs at least one anchor");
  const int nsent = static_cast<int>(doc.sentence_spans.size());

  std::set<int> anchor_sents;
  for (const auto& id : anchors) {
    const EventTrigger* t = doc.find_trigger(id);
    if (!t) throw MarkingError("unknown anchor trigger " + id + " in document " + doc.doc_id);
    anchor_sents.insert(t->sentence_index);
  }

  std::set<int> selected = anchor_sents;

  // Anchor sentences always stay; anything else only fits while the budget
  // lasts.
  if (static_cast<int>(anchor_sents.size()) < max_sentences) {
    int lo = *anchor_sents.begin();
    int hi = *anchor_sents.rbegin();
    if (hi - lo + 1 <= max_sentences) {
      // grow one contiguous block, earlier side first
      for (int s = lo; s <= hi; ++s) selected.insert(s);
      bool before_side = true;
      while (static_cast<int>(selected.size()) < max_sentences && (lo > 0 || hi < nsent - 1)) {
        if (before_side ? lo > 0 : hi >= nsent - 1) {
          selected.insert(--lo);
        } else {
          selected.insert(++hi);
        }
        before_side = !before_side;
      }
    } else {
      // anchors too far apart to bridge: grow each run of adjacent anchor
      // sentences in round-robin turns
      struct Island {
        int lo, hi;
        bool before_side = true;
        bool exhausted = false;
      };
      std::vector<Island> islands;
      for (int s : anchor_sents) {
        if (!islands.empty() && s == islands.back().hi + 1) {
          islands.back().hi = s;
        } else {
          islands.push_back({s, s});
        }
      }
      bool grew = true;
      while (static_cast<int>(selected.size()) < max_sentences && grew) {
        grew = false;
        for (auto& island : islands) {
          if (static_cast<int>(selected.size()) >= max_sentences) break;
          if (island.exhausted) continue;
          bool placed = false;
          for (int attempt = 0; attempt < 2 && !placed; ++attempt) {
            int candidate = island.before_side ? island.lo - 1 : island.hi + 1;
            if (candidate >= 0 && candidate < nsent && !selected.count(candidate)) {
              selected.insert(candidate);
              (island.before_side ? island.lo : island.hi) = candidate;
              placed = true;
            }
            island.before_side = !island.before_side;
          }
          if (placed) {
            grew = true;
          } else {
            island.exhausted = true;
          }
        }
      }
    }
  }

  WindowResult result;
  result.truncated = static_cast<int>(selected.size()) < nsent;
  result.kept_sentences.assign(selected.begin(), selected.end());

  Document& win = result.document;
  win.doc_id = doc.doc_id;
  std::map<int, int> new_index;
  std::map<int, std::size_t> new_base;
  for (int orig : result.kept_sentences) {
    const auto& s = doc.sentence_spans[orig];
    if (!win.text.empty()) win.text += " ";
    std::size_t base = win.text.size();
    win.text += doc.text.substr(s.begin, s.end - s.begin);
    new_index[orig] = static_cast<int>(win.sentence_spans.size());
    new_base[orig] = base;
    win.sentence_spans.push_back({base, win.text.size()});
  }
  for (const auto& t : doc.triggers) {
    auto it = new_index.find(t.sentence_index);
    if (it == new_index.end()) continue;
    EventTrigger moved = t;
    std::size_t orig_sent_begin = doc.sentence_spans[t.sentence_index].begin;
    std::size_t shift = new_base[t.sentence_index];
    moved.span = {t.span.begin - orig_sent_begin + shift, t.span.end - orig_sent_begin + shift};
    moved.sentence_index = it->second;
    win.triggers.push_back(std::move(moved));
  }
  for (const auto& [a, b] : doc.coreferent) {
    if (win.find_trigger(a) && win.find_trigger(b)) win.coreferent.emplace_back(a, b);
  }
  win.validate();
  return result;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format,
                   const RelationSchema& schema, const std::filesystem::path& aux_path) {
  switch (format) {
    case CorpusFormat::native_json:
      return load_native_json(path, schema);
    case CorpusFormat::matres_tsv:
      return load_matres_tsv(path, schema, aux_path);
    case CorpusFormat::tdd_tsv:
      return load_tdd_tsv(path, schema, aux_path);
    case CorpusFormat::timeml_xml:
      return load_timeml_dir(path, schema);
  }
  throw ConfigError("bad corpus format value");
}

}  // namespace trex
