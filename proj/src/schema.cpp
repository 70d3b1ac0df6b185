#include "trex/schema.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "trex/errors.hpp"
#include "trex/util.hpp"

namespace trex {
namespace {

constexpr std::array<Rel, 7> kAllRels = {
    Rel::before, Rel::after,  Rel::equal, Rel::simultaneous,
    Rel::include, Rel::is_included, Rel::vague,
};

Rel canonical_inverse(Rel r) {
  switch (r) {
    case Rel::before: return Rel::after;
    case Rel::after: return Rel::before;
    case Rel::include: return Rel::is_included;
    case Rel::is_included: return Rel::include;
    default: return r;
  }
}

// Shared prompt fragments. Stored verbatim; the bracketed tag example is
// rewritten at render time when the angle tag style is selected.
const std::string kSameEventQuestion =
    "Given the document {document}, are {e1} and {e2} referring to the same "
    "event? Keep the answer short and concise";

const std::string kRankingIntro =
    "Given the document {document} and event triggers that are labeled as "
    "[EVENT][/EVENT], ";

std::map<Rel, std::string> matres_ranking_questions() {
  return {
      {Rel::before,
       kRankingIntro + "which event triggers happened before {anchor}? keep "
                       "the answer short and concise"},
      {Rel::after,
       kRankingIntro + "which event triggers happened after {anchor}? keep "
                       "the answer short and concise"},
      {Rel::equal,
       kRankingIntro + "which event triggers were happening at the same time "
                       "as {anchor}? keep the answer short and concise"},
  };
}

std::map<Rel, std::string> dense_ranking_questions() {
  return {
      {Rel::before,
       kRankingIntro + "which event triggers happened before {anchor}? keep "
                       "the answer short and concise"},
      {Rel::after,
       kRankingIntro + "which event triggers happened after {anchor}? keep "
                       "the answer short and concise"},
      {Rel::simultaneous,
       kRankingIntro + "which event triggers were happening at the same time "
                       "as {anchor}? keep the answer short and concise"},
      {Rel::include,
       kRankingIntro + "which event triggers were included in {anchor}? keep "
                       "the answer short and concise"},
      {Rel::is_included,
       kRankingIntro + "which event triggers that {anchor} were included in? "
                       "keep the answer short and concise"},
  };
}

std::map<Rel, std::string> matres_cot_questions() {
  return {
      {Rel::before, "Is {e1} before {e2}? Keep the answer short and concise."},
      {Rel::after, "Is {e1} after {e2}? Keep the answer short and concise."},
      {Rel::equal,
       "Did {e1} and {e2} simultaneously happen? Keep the answer short and "
       "concise."},
      {Rel::vague,
       "Is the temporal relation of {e1} and {e2} vague? Keep the answer "
       "short and concise."},
  };
}

std::map<Rel, std::string> dense_cot_questions() {
  return {
      {Rel::before,
       "Did {e1} happen before {e2}? Keep the answer short and concise."},
      {Rel::after,
       "Did {e1} happen after {e2}? Keep the answer short and concise."},
      {Rel::simultaneous,
       "Did {e1} and {e2} simultaneously happen? Say yes or no and keep the "
       "answer short and concise"},
      {Rel::include,
       "Did {e2} occur during the time period of {e1}? Keep the answer short "
       "and concise"},
      {Rel::is_included,
       "Did {e1} occur during the time period of {e2}? Keep the answer short "
       "and concise"},
  };
}

const std::string kMatresZeroShot =
    "Given the document {document} and a list of temporal relations "
    "{relation_list} and event triggers are labeled as [EVENT][/EVENT]. What "
    "is the temporal relation between {e1} and {e2}? Answer vague if unsure. "
    "keep the answer short and concise";

// Identical apart from the lowercase "what".
const std::string kDenseZeroShot =
    "Given the document {document} and a list of temporal relations "
    "{relation_list} and event triggers are labeled as [EVENT][/EVENT]. what "
    "is the temporal relation between {e1} and {e2}? Answer vague if unsure. "
    "keep the answer short and concise";

std::map<Rel, Rel> inverse_for(const std::vector<Rel>& output_space) {
  std::map<Rel, Rel> inv;
  for (Rel r : output_space) inv[r] = canonical_inverse(r);
  return inv;
}

std::vector<Rel> rels_from_json(const nlohmann::json& arr, const char* field) {
  if (!arr.is_array()) throw SchemaError(std::string(field) + " must be an array");
  std::vector<Rel> out;
  for (const auto& item : arr) {
    if (!item.is_string()) throw SchemaError(std::string(field) + " entries must be strings");
    auto r = rel_from_name(item.get<std::string>());
    if (!r) {
      throw SchemaError("unknown relation label \"" + item.get<std::string>() + "\" in " + field);
    }
    out.push_back(*r);
  }
  return out;
}

Rel rel_from_json_key(const std::string& key, const char* field) {
  auto r = rel_from_name(key);
  if (!r) throw SchemaError("unknown relation label \"" + key + "\" in " + field);
  return *r;
}

}  // namespace

std::string_view rel_name(Rel r) {
  switch (r) {
    case Rel::before: return "before";
    case Rel::after: return "after";
    case Rel::equal: return "equal";
    case Rel::simultaneous: return "simultaneous";
    case Rel::include: return "include";
    case Rel::is_included: return "is_included";
    case Rel::vague: return "vague";
  }
  throw SchemaError("bad relation value");
}

std::string_view rel_display(Rel r) {
  if (r == Rel::is_included) return "is included";
  return rel_name(r);
}

std::optional<Rel> rel_from_name(std::string_view name) {
  std::string key = to_lower(trim(name));
  std::replace(key.begin(), key.end(), ' ', '_');
  for (Rel r : kAllRels) {
    if (key == rel_name(r)) return r;
  }
  return std::nullopt;
}

bool RelationSchema::vague_in_gold() const {
  return std::find(labels.begin(), labels.end(), Rel::vague) != labels.end();
}

std::vector<Rel> RelationSchema::output_space() const {
  std::vector<Rel> out = labels;
  if (!vague_in_gold()) out.push_back(Rel::vague);
  return out;
}

bool RelationSchema::in_output_space(Rel r) const {
  if (r == Rel::vague) return true;
  return std::find(labels.begin(), labels.end(), r) != labels.end();
}

Rel RelationSchema::inverse_of(Rel r) const {
  auto it = inverse.find(r);
  if (it == inverse.end()) {
    throw SchemaError("relation \"" + std::string(rel_name(r)) + "\" not in schema " + dataset_name);
  }
  return it->second;
}

std::vector<Rel> RelationSchema::cot_order() const {
  std::vector<Rel> order;
  for (Rel r : labels) {
    if (r != Rel::vague && cot_questions.count(r)) order.push_back(r);
  }
  if (cot_questions.count(Rel::vague)) order.push_back(Rel::vague);
  return order;
}

std::string RelationSchema::relation_list_text() const {
  std::string out = "[";
  const auto& list = recited.empty() ? labels : recited;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i) out += ", ";
    out += rel_display(list[i]);
  }
  out += "]";
  return out;
}

void RelationSchema::validate() const {
  if (dataset_name.empty()) throw SchemaError("dataset_name is empty");
  if (labels.empty()) throw SchemaError("label list is empty");

  std::set<Rel> label_set(labels.begin(), labels.end());
  if (label_set.size() != labels.size()) throw SchemaError("duplicate labels in schema " + dataset_name);

  const auto space = output_space();
  std::set<Rel> space_set(space.begin(), space.end());

  if (inverse.size() != space_set.size()) {
    throw SchemaError("inverse map must cover exactly the output space in schema " + dataset_name);
  }
  for (const auto& [r, ir] : inverse) {
    if (!space_set.count(r) || !space_set.count(ir)) {
      throw SchemaError("inverse map leaves the output space in schema " + dataset_name);
    }
    if (ir != canonical_inverse(r)) {
      throw SchemaError("inverse(" + std::string(rel_name(r)) + ") must be " +
                        std::string(rel_name(canonical_inverse(r))) + " in schema " + dataset_name);
    }
    auto back = inverse.find(ir);
    if (back == inverse.end() || back->second != r) {
      throw SchemaError("inverse map is not an involution in schema " + dataset_name);
    }
  }

  std::set<Rel> queryable_set(queryable.begin(), queryable.end());
  if (queryable_set.size() != queryable.size()) {
    throw SchemaError("duplicate queryable labels in schema " + dataset_name);
  }
  for (Rel r : queryable) {
    if (r == Rel::vague) throw SchemaError("vague cannot be queryable in schema " + dataset_name);
    if (!label_set.count(r)) {
      throw SchemaError("queryable label " + std::string(rel_name(r)) + " not in label list of schema " + dataset_name);
    }
  }
  for (Rel r : queryable) {
    if (!question_phrasings.count(r)) {
      throw SchemaError("queryable label " + std::string(rel_name(r)) + " lacks a question phrasing in schema " + dataset_name);
    }
  }
  for (const auto& [r, text] : question_phrasings) {
    if (!queryable_set.count(r)) {
      throw SchemaError("question phrasing for non-queryable label " + std::string(rel_name(r)) + " in schema " + dataset_name);
    }
    if (text.empty()) throw SchemaError("empty question phrasing in schema " + dataset_name);
  }

  for (const auto& [r, text] : cot_questions) {
    if (!space_set.count(r)) {
      throw SchemaError("yes/no question for out-of-space label " + std::string(rel_name(r)) + " in schema " + dataset_name);
    }
    if (text.empty()) throw SchemaError("empty yes/no question in schema " + dataset_name);
  }

  for (Rel r : recited) {
    if (!space_set.count(r)) {
      throw SchemaError("recited label " + std::string(rel_name(r)) + " outside output space in schema " + dataset_name);
    }
  }
  std::set<Rel> recited_set(recited.begin(), recited.end());
  if (recited_set.size() != recited.size()) {
    throw SchemaError("duplicate recited labels in schema " + dataset_name);
  }

  if (zero_shot_template.empty()) throw SchemaError("zero-shot template is empty in schema " + dataset_name);

  for (const auto& [r, alts] : synonyms) {
    if (!space_set.count(r)) {
      throw SchemaError("synonyms for out-of-space label " + std::string(rel_name(r)) + " in schema " + dataset_name);
    }
    for (const auto& alt : alts) {
      if (trim(alt).empty()) throw SchemaError("empty synonym in schema " + dataset_name);
    }
  }
}

nlohmann::json RelationSchema::to_json() const {
  nlohmann::json j;
  j["dataset_name"] = dataset_name;
  auto names = nlohmann::json::array();
  for (Rel r : labels) names.push_back(std::string(rel_name(r)));
  j["labels"] = names;

  nlohmann::json inv;
  for (const auto& [r, ir] : inverse) inv[std::string(rel_name(r))] = std::string(rel_name(ir));
  j["inverse"] = inv;

  auto q = nlohmann::json::array();
  for (Rel r : queryable) q.push_back(std::string(rel_name(r)));
  j["queryable"] = q;

  nlohmann::json phr;
  for (const auto& [r, text] : question_phrasings) phr[std::string(rel_name(r))] = text;
  j["question_phrasings"] = phr;

  nlohmann::json cot;
  for (const auto& [r, text] : cot_questions) cot[std::string(rel_name(r))] = text;
  j["cot_questions"] = cot;

  j["same_event_question"] = same_event_question;
  j["zero_shot_template"] = zero_shot_template;

  auto rec = nlohmann::json::array();
  for (Rel r : recited) rec.push_back(std::string(rel_name(r)));
  j["recited"] = rec;

  if (!extra_refusal_phrases.empty()) j["refusal_phrases"] = extra_refusal_phrases;
  if (!synonyms.empty()) {
    nlohmann::json syn;
    for (const auto& [r, alts] : synonyms) syn[std::string(rel_name(r))] = alts;
    j["synonyms"] = syn;
  }
  return j;
}

RelationSchema RelationSchema::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("schema JSON must be an object");
  RelationSchema s;
  if (!j.contains("dataset_name") || !j.at("dataset_name").is_string()) {
    throw SchemaError("schema JSON missing dataset_name");
  }
  s.dataset_name = j.at("dataset_name").get<std::string>();
  if (!j.contains("labels")) throw SchemaError("schema JSON missing labels");
  s.labels = rels_from_json(j.at("labels"), "labels");

  if (j.contains("inverse")) {
    for (const auto& [key, value] : j.at("inverse").items()) {
      if (!value.is_string()) throw SchemaError("inverse entries must be strings");
      Rel r = rel_from_json_key(key, "inverse");
      auto ir = rel_from_name(value.get<std::string>());
      if (!ir) throw SchemaError("unknown relation label \"" + value.get<std::string>() + "\" in inverse");
      s.inverse[r] = *ir;
    }
  } else {
    s.inverse = inverse_for(s.output_space());
  }

  if (j.contains("queryable")) s.queryable = rels_from_json(j.at("queryable"), "queryable");
  if (j.contains("question_phrasings")) {
    for (const auto& [key, value] : j.at("question_phrasings").items()) {
      if (!value.is_string()) throw SchemaError("question_phrasings entries must be strings");
      s.question_phrasings[rel_from_json_key(key, "question_phrasings")] = value.get<std::string>();
    }
  }
  if (j.contains("cot_questions")) {
    for (const auto& [key, value] : j.at("cot_questions").items()) {
      if (!value.is_string()) throw SchemaError("cot_questions entries must be strings");
      s.cot_questions[rel_from_json_key(key, "cot_questions")] = value.get<std::string>();
    }
  }
  if (j.contains("same_event_question")) {
    s.same_event_question = j.at("same_event_question").get<std::string>();
  }
  if (j.contains("zero_shot_template")) {
    s.zero_shot_template = j.at("zero_shot_template").get<std::string>();
  }
  if (j.contains("recited")) {
    s.recited = rels_from_json(j.at("recited"), "recited");
  } else {
    s.recited = s.labels;
  }
  if (j.contains("refusal_phrases")) {
    for (const auto& item : j.at("refusal_phrases")) {
      if (!item.is_string()) throw SchemaError("refusal_phrases entries must be strings");
      s.extra_refusal_phrases.push_back(item.get<std::string>());
    }
  }
  if (j.contains("synonyms")) {
    for (const auto& [key, value] : j.at("synonyms").items()) {
      Rel r = rel_from_json_key(key, "synonyms");
      if (!value.is_array()) throw SchemaError("synonyms entries must be arrays");
      for (const auto& alt : value) {
        if (!alt.is_string()) throw SchemaError("synonyms must be strings");
        s.synonyms[r].push_back(alt.get<std::string>());
      }
    }
  }
  s.validate();
  return s;
}

std::string RelationSchema::content_hash() const { return sha256_hex(to_json().dump()); }

RelationSchema builtin_schema(const std::string& dataset_name) {
  RelationSchema s;
  s.dataset_name = dataset_name;
  s.same_event_question = kSameEventQuestion;
  if (dataset_name == "matres") {
    s.labels = {Rel::before, Rel::after, Rel::vague, Rel::equal};
    s.queryable = {Rel::before, Rel::after, Rel::equal};
    s.question_phrasings = matres_ranking_questions();
    s.cot_questions = matres_cot_questions();
    s.zero_shot_template = kMatresZeroShot;
    s.recited = s.labels;
  } else if (dataset_name == "tbdense") {
    s.labels = {Rel::before, Rel::after,        Rel::include,
                Rel::is_included, Rel::simultaneous, Rel::vague};
    s.queryable = {Rel::before, Rel::after, Rel::include, Rel::is_included, Rel::simultaneous};
    s.question_phrasings = dense_ranking_questions();
    s.cot_questions = dense_cot_questions();
    s.zero_shot_template = kDenseZeroShot;
    // The recited list leaves vague out; the "Answer vague if unsure"
    // instruction covers it.
    s.recited = s.queryable;
  } else if (dataset_name == "tddman") {
    s.labels = {Rel::before, Rel::after, Rel::include, Rel::is_included, Rel::simultaneous};
    s.queryable = s.labels;
    s.question_phrasings = dense_ranking_questions();
    s.cot_questions = dense_cot_questions();
    s.zero_shot_template = kDenseZeroShot;
    s.recited = s.labels;
  } else {
    throw ConfigError("unknown dataset \"" + dataset_name + "\" (expected matres, tbdense, or tddman)");
  }
  s.inverse = inverse_for(s.output_space());
  s.validate();
  return s;
}

RelationSchema load_schema_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError("cannot parse schema file " + path.string() + ": " + e.what());
  }
  return RelationSchema::from_json(j);
}

void export_prompts(const RelationSchema& schema, const std::filesystem::path& dir) {
  write_file(dir / "zero_shot.txt", schema.zero_shot_template);
  if (!schema.same_event_question.empty()) {
    write_file(dir / "same_event.txt", schema.same_event_question);
  }
  for (const auto& [r, text] : schema.question_phrasings) {
    write_file(dir / ("ranking_" + std::string(rel_name(r)) + ".txt"), text);
  }
  for (const auto& [r, text] : schema.cot_questions) {
    write_file(dir / ("cot_" + std::string(rel_name(r)) + ".txt"), text);
  }
}

void load_prompt_overrides(RelationSchema& schema, const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("prompt directory not found: " + dir.string());
  }
  auto maybe = [&](const std::string& name, std::string& slot) {
    auto path = dir / name;
    if (std::filesystem::exists(path)) slot = read_file(path);
  };
  maybe("zero_shot.txt", schema.zero_shot_template);
  maybe("same_event.txt", schema.same_event_question);
  for (auto& [r, text] : schema.question_phrasings) {
    maybe("ranking_" + std::string(rel_name(r)) + ".txt", text);
  }
  for (auto& [r, text] : schema.cot_questions) {
    maybe("cot_" + std::string(rel_name(r)) + ".txt", text);
  }
  schema.validate();
}

Rel ranking_answer_relation(Rel question_relation) {
  switch (question_relation) {
    case Rel::include: return Rel::is_included;
    case Rel::is_included: return Rel::include;
    default: return question_relation;
  }
}

Rel orient(const RelationSchema& schema, std::string_view anchor, Rel r, std::string_view other,
           std::string_view e1, std::string_view e2) {
  if (anchor == e1 && other == e2) return r;
  if (anchor == e2 && other == e1) return schema.inverse_of(r);
  throw OrientationError("assertion events {" + std::string(anchor) + ", " + std::string(other) +
                         "} do not match pair (" + std::string(e1) + ", " + std::string(e2) + ")");
}

}  // namespace trex
