#include "trex/fixtures.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "trex/errors.hpp"
#include "trex/util.hpp"

namespace trex {

namespace {

// Distinct past-tense verbs; trigger surfaces are drawn from here, so the
// pool size caps how many ordinary events one document can hold.
const std::vector<std::string>& verb_pool() {
  static const std::vector<std::string> pool = {
      "arrived",      "departed",  "collapsed",  "erupted",   "surged",     "faded",
      "emerged",      "vanished",  "accelerated", "stalled",  "resumed",    "paused",
      "escalated",    "subsided",  "convened",   "adjourned", "launched",   "landed",
      "soared",       "plunged",   "expanded",   "contracted", "ignited",   "smoldered",
      "advanced",     "retreated", "gathered",   "dispersed", "bloomed",    "withered",
      "spiked",       "dipped",    "rallied",    "slumped",   "opened",     "closed",
      "peaked",       "bottomed",  "intensified", "weakened", "merged",     "splintered",
      "froze",        "thawed",    "climbed",    "dropped",   "swelled",    "shrank",
      "flared",       "dimmed",    "hastened",   "lingered",  "commenced",  "concluded",
      "unfolded",     "settled",   "stirred",    "rested",    "tumbled",    "steadied",
  };
  return pool;
}

const std::vector<std::string>& subject_pool() {
  static const std::vector<std::string> pool = {
      "The council",      "The convoy",   "The market",   "The storm",
      "The committee",    "The expedition", "The negotiations", "The ceremony",
      "The broadcast",    "The festival", "The assembly", "The patrol",
  };
  return pool;
}

const std::vector<std::string>& tail_pool() {
  static const std::vector<std::string> pool = {
      "near the border.",    "at first light.",      "after long delays.",
      "without warning.",    "across the region.",   "by midweek.",
      "despite the forecast.", "under heavy scrutiny.", "in the old quarter.",
      "before the deadline.",
  };
  return pool;
}

// Mention pairs of one underlying event read best with these surfaces.
const std::vector<std::pair<std::string, std::string>>& coref_surfaces() {
  static const std::vector<std::pair<std::string, std::string>> pairs = {
      {"started", "ended"},
      {"began", "finished"},
  };
  return pairs;
}

std::string draw_key(std::uint64_t seed, const std::string& doc, const std::string& tag,
                     const std::string& detail) {
  return "fixture|" + std::to_string(seed) + "|" + doc + "|" + tag + "|" + detail;
}

const std::string& pick(const std::vector<std::string>& pool, const std::string& key) {
  return pool[stable_hash64(key) % pool.size()];
}

// Oriented so e1 is the lexicographic minimum; lets duplicates be compared.
Rel canonical_label(const FixtureRelation& r, const RelationSchema& schema) {
  return r.e1 < r.e2 ? r.label : schema.inverse_of(r.label);
}

}  // namespace

void FixtureSpec::validate() const {
  auto schema = builtin_schema(dataset);
  std::set<Rel> allowed(schema.labels.begin(), schema.labels.end());
  std::set<std::string> doc_ids;
  for (const auto& doc : documents) {
    if (doc.doc_id.empty()) throw GenerationError("fixture document with empty doc_id");
    if (!doc_ids.insert(doc.doc_id).second) {
      throw GenerationError("duplicate fixture document " + doc.doc_id);
    }
    if (doc.events.empty()) {
      throw GenerationError("fixture document " + doc.doc_id + " has no events");
    }
    std::set<std::string> events;
    for (const auto& id : doc.events) {
      if (id.empty()) throw GenerationError("empty event id in document " + doc.doc_id);
      if (!events.insert(id).second) {
        throw GenerationError("duplicate event " + id + " in document " + doc.doc_id);
      }
    }
    if (doc.coreferent.size() > coref_surfaces().size()) {
      throw GenerationError("document " + doc.doc_id + " wants more coreferent pairs than the " +
                            std::to_string(coref_surfaces().size()) + " surface patterns");
    }
    std::set<std::string> coref_events;
    for (const auto& [a, b] : doc.coreferent) {
      if (!events.count(a) || !events.count(b)) {
        throw GenerationError("coreferent pair references unknown event in document " +
                              doc.doc_id);
      }
      if (a == b) throw GenerationError("coreferent pair repeats " + a);
      if (!coref_events.insert(a).second || !coref_events.insert(b).second) {
        throw GenerationError("event in two coreferent pairs in document " + doc.doc_id);
      }
    }
    std::size_t ordinary = doc.events.size() - coref_events.size();
    if (ordinary > verb_pool().size()) {
      throw GenerationError("document " + doc.doc_id + " exceeds the " +
                            std::to_string(verb_pool().size()) + " distinct trigger surfaces");
    }
    std::map<std::string, Rel> graph;  // unordered pair -> label oriented to min event
    for (const auto& r : doc.relations) {
      if (!events.count(r.e1) || !events.count(r.e2)) {
        throw GenerationError("relation references unknown event in document " + doc.doc_id);
      }
      if (r.e1 == r.e2) {
        throw GenerationError("relation pairs " + r.e1 + " with itself in document " +
                              doc.doc_id);
      }
      if (!allowed.count(r.label)) {
        throw GenerationError("label " + std::string(rel_name(r.label)) +
                              " outside the " + dataset + " gold set");
      }
      auto key = std::min(r.e1, r.e2) + "\x1f" + std::max(r.e1, r.e2);
      Rel oriented = canonical_label(r, schema);
      auto [it, fresh] = graph.emplace(key, oriented);
      if (!fresh && it->second != oriented) {
        throw GenerationError("pair " + r.e1 + "/" + r.e2 + " labeled both " +
                              std::string(rel_name(it->second)) + " and " +
                              std::string(rel_name(oriented)) + " in document " + doc.doc_id);
      }
    }
  }
}

nlohmann::json FixtureSpec::to_json() const {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& doc : documents) {
    nlohmann::json relations = nlohmann::json::array();
    for (const auto& r : doc.relations) {
      relations.push_back({{"e1", r.e1}, {"e2", r.e2}, {"label", rel_name(r.label)}});
    }
    nlohmann::json coref = nlohmann::json::array();
    for (const auto& [a, b] : doc.coreferent) coref.push_back({a, b});
    docs.push_back({{"doc_id", doc.doc_id},
                    {"events", doc.events},
                    {"relations", relations},
                    {"coreferent", coref}});
  }
  return {{"dataset", dataset}, {"seed", seed}, {"documents", docs}};
}

FixtureSpec FixtureSpec::from_json(const nlohmann::json& j) {
  FixtureSpec spec;
  try {
    spec.dataset = j.at("dataset").get<std::string>();
    spec.seed = j.value("seed", std::uint64_t{0});
    for (const auto& jd : j.at("documents")) {
      FixtureDoc doc;
      doc.doc_id = jd.at("doc_id").get<std::string>();
      doc.events = jd.at("events").get<std::vector<std::string>>();
      for (const auto& jr : jd.value("relations", nlohmann::json::array())) {
        auto name = jr.at("label").get<std::string>();
        auto label = rel_from_name(name);
        if (!label) throw LoadError("fixture spec: unknown relation label " + name);
        doc.relations.push_back({jr.at("e1").get<std::string>(),
                                 jr.at("e2").get<std::string>(), *label});
      }
      for (const auto& jc : jd.value("coreferent", nlohmann::json::array())) {
        if (!jc.is_array() || jc.size() != 2) {
          throw LoadError("fixture spec: coreferent entries are two-event arrays");
        }
        doc.coreferent.emplace_back(jc[0].get<std::string>(), jc[1].get<std::string>());
      }
      spec.documents.push_back(std::move(doc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(std::string("fixture spec: ") + e.what());
  }
  return spec;
}

FixtureSpec load_fixture_spec(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw LoadError("fixture spec " + path.string() + ": " + e.what());
  }
  return FixtureSpec::from_json(j);
}

Corpus generate_fixture(const FixtureSpec& spec, std::uint64_t seed) {
  spec.validate();
  Corpus corpus;
  corpus.dataset_name = spec.dataset;
  corpus.schema = builtin_schema(spec.dataset);

  for (const auto& fdoc : spec.documents) {
    // coreferent mentions share a subject and take the reserved surfaces
    std::map<std::string, std::string> forced_surface;
    std::map<std::string, std::string> forced_subject;
    for (std::size_t k = 0; k < fdoc.coreferent.size(); ++k) {
      const auto& [a, b] = fdoc.coreferent[k];
      forced_surface[a] = coref_surfaces()[k].first;
      forced_surface[b] = coref_surfaces()[k].second;
      auto subject = pick(subject_pool(),
                          draw_key(seed, fdoc.doc_id, "coref_subject", std::to_string(k)));
      forced_subject[a] = subject;
      forced_subject[b] = subject;
    }

    Document doc;
    doc.doc_id = fdoc.doc_id;
    std::size_t verb_start =
        stable_hash64(draw_key(seed, fdoc.doc_id, "verbs", "")) % verb_pool().size();
    std::size_t ordinary = 0;
    for (std::size_t i = 0; i < fdoc.events.size(); ++i) {
      const auto& id = fdoc.events[i];
      std::string surface;
      std::string subject;
      if (auto it = forced_surface.find(id); it != forced_surface.end()) {
        surface = it->second;
        subject = forced_subject.at(id);
      } else {
        surface = verb_pool()[(verb_start + ordinary++) % verb_pool().size()];
        subject = pick(subject_pool(), draw_key(seed, fdoc.doc_id, "subject", id));
      }
      auto tail = pick(tail_pool(), draw_key(seed, fdoc.doc_id, "tail", id));

      std::size_t start = doc.text.empty() ? 0 : doc.text.size() + 1;
      if (!doc.text.empty()) doc.text += " ";
      std::string sentence = subject + " " + surface + " " + tail;
      doc.text += sentence;
      doc.sentence_spans.push_back({start, start + sentence.size()});
      std::size_t at = start + subject.size() + 1;
      doc.triggers.push_back({id, surface, {at, at + surface.size()}, static_cast<int>(i)});
    }
    doc.coreferent = fdoc.coreferent;
    corpus.documents[doc.doc_id] = std::move(doc);

    std::set<std::string> seen;
    for (const auto& r : fdoc.relations) {
      auto key = std::min(r.e1, r.e2) + "\x1f" + std::max(r.e1, r.e2);
      if (!seen.insert(key).second) continue;  // validated consistent above
      corpus.pairs.push_back({fdoc.doc_id, r.e1, r.e2, r.label});
    }
  }
  corpus.validate();
  return corpus;
}

Corpus generate_fixture(const FixtureSpec& spec) { return generate_fixture(spec, spec.seed); }

}  // namespace trex
