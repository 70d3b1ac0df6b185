#include "trex/strategies.hpp"

#include <algorithm>

#include "trex/errors.hpp"
#include "trex/normalizer.hpp"

namespace trex {

namespace {

const EventTrigger& require_trigger(const Document& doc, const std::string& id) {
  const auto* t = doc.find_trigger(id);
  if (!t) throw GenerationError("unknown trigger " + id + " in document " + doc.doc_id);
  return *t;
}

QueryIntent pair_intent(QueryKind kind, const GoldPair& pair) {
  QueryIntent intent;
  intent.kind = kind;
  intent.doc_id = pair.doc_id;
  intent.e1 = pair.e1;
  intent.e2 = pair.e2;
  return intent;
}

Assertion make_assertion(Rel question, const std::string& anchor, const std::string& answer,
                         const std::string& source) {
  // "which event triggers were included in {anchor}" claims the anchor
  // includes the answer; the other questions put the answer first.
  if (question == Rel::include || question == Rel::is_included)
    return {anchor, question, answer, source};
  return {answer, question, anchor, source};
}

Rel pick_majority(const std::vector<Rel>& oriented, const RelationSchema& schema) {
  std::map<Rel, int> counts;
  for (Rel r : oriented) counts[r]++;
  Rel best = oriented.front();
  int best_count = -1;
  for (Rel r : schema.labels) {  // schema order breaks ties deterministically
    auto it = counts.find(r);
    if (it != counts.end() && it->second > best_count) {
      best = r;
      best_count = it->second;
    }
  }
  return best;
}

}  // namespace

std::string strategy_name(Strategy s) {
  switch (s) {
    case Strategy::zero_shot: return "zero_shot";
    case Strategy::event_ranking: return "event_ranking";
    case Strategy::cot: return "cot";
  }
  throw GenerationError("bad strategy value");
}

Strategy strategy_from_name(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "zero_shot") return Strategy::zero_shot;
  if (n == "event_ranking") return Strategy::event_ranking;
  if (n == "cot" || n == "chain_of_thought") return Strategy::cot;
  throw ConfigError("unknown strategy: " + name);
}

nlohmann::json Assertion::to_json() const {
  return {{"anchor", anchor},
          {"relation", rel_name(relation)},
          {"other", other},
          {"source", source}};
}

namespace {
Rel rel_or_throw(const std::string& name) {
  auto r = rel_from_name(name);
  if (!r) throw GenerationError("unknown relation label \"" + name + "\"");
  return *r;
}
}  // namespace

Assertion Assertion::from_json(const nlohmann::json& j) {
  Assertion a;
  a.anchor = j.at("anchor").get<std::string>();
  a.relation = rel_or_throw(j.at("relation").get<std::string>());
  a.other = j.at("other").get<std::string>();
  a.source = j.value("source", "");
  return a;
}

nlohmann::json Prediction::to_json() const {
  nlohmann::json j = {
      {"doc_id", doc_id},
      {"e1", e1},
      {"e2", e2},
      {"label", rel_name(label)},
      {"strategy", strategy_name(strategy)},
      {"transcripts", transcripts},
  };
  nlohmann::json flags = nlohmann::json::object();
  if (truncated_context) flags["truncated_context"] = true;
  if (conflict_vague) flags["conflict_vague"] = true;
  if (undetected_vague) flags["undetected_vague"] = true;
  if (abstain_vague) flags["abstain_vague"] = true;
  if (same_event) flags["same_event"] = true;
  j["flags"] = flags;
  if (failed) {
    j["failed"] = true;
    j["failure"] = failure;
  }
  return j;
}

Prediction Prediction::from_json(const nlohmann::json& j) {
  Prediction p;
  p.doc_id = j.at("doc_id").get<std::string>();
  p.e1 = j.at("e1").get<std::string>();
  p.e2 = j.at("e2").get<std::string>();
  p.label = rel_or_throw(j.at("label").get<std::string>());
  p.strategy = strategy_from_name(j.at("strategy").get<std::string>());
  if (j.contains("transcripts")) p.transcripts = j.at("transcripts").get<std::vector<std::string>>();
  auto flags = j.value("flags", nlohmann::json::object());
  p.truncated_context = flags.value("truncated_context", false);
  p.conflict_vague = flags.value("conflict_vague", false);
  p.undetected_vague = flags.value("undetected_vague", false);
  p.abstain_vague = flags.value("abstain_vague", false);
  p.same_event = flags.value("same_event", false);
  p.failed = j.value("failed", false);
  p.failure = j.value("failure", "");
  return p;
}

std::string render_prompt(const std::string& tpl,
                          const std::map<std::string, std::string>& values, TagStyle style) {
  std::string out = tpl;
  if (style == TagStyle::angle) {
    const std::string from = tag_example(TagStyle::bracket);
    const std::string to = tag_example(TagStyle::angle);
    for (auto pos = out.find(from); pos != std::string::npos; pos = out.find(from, pos + to.size()))
      out.replace(pos, from.size(), to);
  }
  for (const auto& [key, value] : values) {
    const std::string slot = "{" + key + "}";
    for (auto pos = out.find(slot); pos != std::string::npos; pos = out.find(slot, pos + value.size()))
      out.replace(pos, slot.size(), value);
  }
  return out;
}

Prediction run_zero_shot(Gateway& gateway, const Corpus& corpus, const GoldPair& pair,
                         const StrategyOptions& opts) {
  const auto& schema = corpus.schema;
  const auto& doc = corpus.document(pair.doc_id);
  const auto& t1 = require_trigger(doc, pair.e1);
  const auto& t2 = require_trigger(doc, pair.e2);

  Prediction pred;
  pred.doc_id = pair.doc_id;
  pred.e1 = pair.e1;
  pred.e2 = pair.e2;
  pred.strategy = Strategy::zero_shot;

  auto prompt = render_prompt(schema.zero_shot_template,
                              {{"document", mark_events(doc, opts.tag_style)},
                               {"relation_list", schema.relation_list_text()},
                               {"e1", tagged_trigger(t1, opts.tag_style)},
                               {"e2", tagged_trigger(t2, opts.tag_style)}},
                              opts.tag_style);

  auto session = gateway.open_session("zero_shot", pair.doc_id, pair.e1, pair.e2);
  try {
    auto reply = gateway.send(session, prompt, pair_intent(QueryKind::relation_multiclass, pair));
    auto verdict = parse_label(reply, schema);
    if (verdict.status == ParseStatus::abstain) {
      pred.label = Rel::vague;
      pred.abstain_vague = true;
    } else {
      pred.label = verdict.label;
    }
  } catch (const Error& e) {
    pred.failed = true;
    pred.failure = e.what();
  }
  gateway.close_session(session);
  pred.transcripts.push_back(session.content_hash());
  return pred;
}

std::vector<std::string> ranking_anchors(const Corpus& corpus, const std::string& doc_id) {
  const auto& doc = corpus.document(doc_id);
  std::set<std::string> in_pairs;
  for (const auto& pair : corpus.pairs) {
    if (pair.doc_id != doc_id) continue;
    in_pairs.insert(pair.e1);
    in_pairs.insert(pair.e2);
  }
  std::vector<std::string> anchors;
  for (const auto& t : doc.triggers)
    if (in_pairs.count(t.id)) anchors.push_back(t.id);
  return anchors;
}

RankingResult run_event_ranking(Gateway& gateway, const Corpus& corpus,
                                const std::string& doc_id, const std::string& anchor,
                                const StrategyOptions& opts) {
  const auto& schema = corpus.schema;
  const auto& doc = corpus.document(doc_id);
  require_trigger(doc, anchor);

  RankingResult result;
  result.doc_id = doc_id;
  result.anchor = anchor;

  const Document* context = &doc;
  WindowResult window;
  if (opts.max_context_sentences > 0) {
    window = context_window(doc, {anchor}, opts.max_context_sentences);
    context = &window.document;
    result.truncated = window.truncated;
  }
  auto marked = mark_events(*context, opts.tag_style);
  auto anchor_text = tagged_trigger(require_trigger(*context, anchor), opts.tag_style);

  for (Rel question : schema.labels) {
    if (!schema.question_phrasings.count(question)) continue;
    auto prompt = render_prompt(schema.question_phrasings.at(question),
                                {{"document", marked}, {"anchor", anchor_text}},
                                opts.tag_style);
    QueryIntent intent;
    intent.kind = QueryKind::event_ranking;
    intent.doc_id = doc_id;
    intent.anchor = anchor;
    intent.relation = question;

    auto session = gateway.open_session("event_ranking", doc_id, anchor, "");
    try {
      auto reply = gateway.send(session, prompt, intent);
      auto verdict = parse_event_list(reply, *context);
      for (const auto& id : verdict.events) {
        if (id == anchor) continue;
        result.assertions.push_back(make_assertion(question, anchor, id, session.content_hash()));
      }
    } catch (const Error& e) {
      result.failed = true;
      result.failure = e.what();
    }
    gateway.close_session(session);
    result.transcripts.push_back(session.content_hash());
  }
  return result;
}

std::vector<Prediction> aggregate_event_ranking(const std::vector<Assertion>& assertions,
                                                const std::vector<GoldPair>& gold_pairs,
                                                const RelationSchema& schema,
                                                const StrategyOptions& opts) {
  std::vector<Prediction> predictions;
  predictions.reserve(gold_pairs.size());
  for (const auto& pair : gold_pairs) {
    Prediction pred;
    pred.doc_id = pair.doc_id;
    pred.e1 = pair.e1;
    pred.e2 = pair.e2;
    pred.strategy = Strategy::event_ranking;

    std::vector<Rel> oriented;
    for (const auto& a : assertions) {
      bool forward = a.anchor == pair.e1 && a.other == pair.e2;
      bool backward = a.anchor == pair.e2 && a.other == pair.e1;
      if (!forward && !backward) continue;
      oriented.push_back(forward ? a.relation : schema.inverse_of(a.relation));
      pred.transcripts.push_back(a.source);
    }
    std::sort(pred.transcripts.begin(), pred.transcripts.end());
    pred.transcripts.erase(std::unique(pred.transcripts.begin(), pred.transcripts.end()),
                           pred.transcripts.end());

    std::set<Rel> distinct(oriented.begin(), oriented.end());
    if (oriented.empty()) {
      pred.label = Rel::vague;
      pred.undetected_vague = true;
    } else if ((int)distinct.size() >= opts.conflict_threshold) {
      pred.label = Rel::vague;
      pred.conflict_vague = true;
    } else {
      pred.label = pick_majority(oriented, schema);
    }
    predictions.push_back(std::move(pred));
  }
  return predictions;
}

std::vector<Prediction> aggregate_event_ranking(const std::vector<RankingResult>& rounds,
                                                const std::vector<GoldPair>& gold_pairs,
                                                const RelationSchema& schema,
                                                const StrategyOptions& opts) {
  std::vector<Assertion> pooled;
  std::map<std::string, const RankingResult*> by_anchor;
  for (const auto& round : rounds) {
    pooled.insert(pooled.end(), round.assertions.begin(), round.assertions.end());
    by_anchor[round.doc_id + "\x1f" + round.anchor] = &round;
  }
  auto predictions = aggregate_event_ranking(pooled, gold_pairs, schema, opts);
  for (auto& pred : predictions) {
    for (const auto& end : {pred.e1, pred.e2}) {
      auto it = by_anchor.find(pred.doc_id + "\x1f" + end);
      if (it == by_anchor.end()) continue;
      if (it->second->truncated) pred.truncated_context = true;
      if (it->second->failed) {
        pred.failed = true;
        if (pred.failure.empty()) pred.failure = it->second->failure;
      }
    }
  }
  return predictions;
}

Prediction run_cot(Gateway& gateway, const Corpus& corpus, const GoldPair& pair,
                   const StrategyOptions& opts) {
  const auto& schema = corpus.schema;
  const auto& doc = corpus.document(pair.doc_id);
  const auto& t1 = require_trigger(doc, pair.e1);
  const auto& t2 = require_trigger(doc, pair.e2);

  Prediction pred;
  pred.doc_id = pair.doc_id;
  pred.e1 = pair.e1;
  pred.e2 = pair.e2;
  pred.strategy = Strategy::cot;

  std::map<std::string, std::string> slots = {
      {"document", mark_events(doc, opts.tag_style)},
      {"e1", tagged_trigger(t1, opts.tag_style)},
      {"e2", tagged_trigger(t2, opts.tag_style)},
  };

  auto session = gateway.open_session("cot", pair.doc_id, pair.e1, pair.e2);
  try {
    if (opts.cot_same_event_turn) {
      auto prompt = render_prompt(schema.same_event_question, slots, opts.tag_style);
      auto reply = gateway.send(session, prompt, pair_intent(QueryKind::same_event, pair));
      pred.same_event = parse_yesno(reply, &schema) == YesNo::yes;
    }
    bool decided = false;
    for (Rel question : schema.cot_order()) {
      if (!schema.cot_questions.count(question)) continue;
      auto prompt = render_prompt(schema.cot_questions.at(question), slots, opts.tag_style);
      if (pred.same_event) prompt += " in that event";
      auto intent = pair_intent(QueryKind::relation_yesno, pair);
      intent.relation = question;
      auto reply = gateway.send(session, prompt, intent);
      if (parse_yesno(reply, &schema) == YesNo::yes) {
        pred.label = question;
        decided = true;
        break;
      }
    }
    if (!decided) {
      pred.label = Rel::vague;
      pred.abstain_vague = true;
    }
  } catch (const Error& e) {
    pred.failed = true;
    pred.failure = e.what();
  }
  gateway.close_session(session);
  pred.transcripts.push_back(session.content_hash());
  return pred;
}

}  // namespace trex
