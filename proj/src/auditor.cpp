#include "trex/auditor.hpp"

#include <algorithm>

#include "trex/errors.hpp"
#include "trex/normalizer.hpp"

namespace trex {

namespace {

struct Claim {
  std::string subject;
  Rel relation = Rel::vague;
  std::string object;
};

// Rewrites an assertion so it reads subject-relation-object with the
// original answer event as subject.
Claim normalize(const Assertion& a, const RelationSchema& schema) {
  if (a.relation == Rel::include || a.relation == Rel::is_included)
    return {a.other, schema.inverse_of(a.relation), a.anchor};
  return {a.anchor, a.relation, a.other};
}

std::optional<double> rate(long num, long den) {
  if (den == 0) return std::nullopt;
  return double(num) / double(den);
}

void add_example(AuditReport& report, const std::string& category, const std::string& ref,
                 int max_examples) {
  auto& bucket = report.examples[category];
  if ((int)bucket.size() < max_examples && !ref.empty()) bucket.push_back(ref);
}

void append_rate(nlohmann::json& j, const char* key, std::optional<double> value) {
  if (value) j[key] = *value;
}

}  // namespace

std::optional<double> AuditReport::violation_rate() const {
  return rate(omission + misplacement, audited);
}
std::optional<double> AuditReport::omission_rate() const { return rate(omission, audited); }
std::optional<double> AuditReport::misplacement_rate() const {
  return rate(misplacement, audited);
}
std::optional<double> AuditReport::commit_rate() const {
  return rate(followup_committed, followup_total);
}
std::optional<double> AuditReport::incorrect_rate() const {
  return rate(committed_incorrect, followup_committed);
}

void AuditReport::merge(const AuditReport& other, int max_examples) {
  audited += other.audited;
  consistent += other.consistent;
  omission += other.omission;
  misplacement += other.misplacement;
  unaudited += other.unaudited;
  pairs_probed += other.pairs_probed;
  followup_total += other.followup_total;
  followup_committed += other.followup_committed;
  committed_incorrect += other.committed_incorrect;
  for (const auto& [category, refs] : other.examples)
    for (const auto& ref : refs) add_example(*this, category, ref, max_examples);
}

nlohmann::json AuditReport::to_json() const {
  nlohmann::json j = {
      {"inverse",
       {{"audited", audited},
        {"consistent", consistent},
        {"omission", omission},
        {"misplacement", misplacement},
        {"unaudited", unaudited}}},
      {"unknown_followup",
       {{"pairs_probed", pairs_probed},
        {"followup_total", followup_total},
        {"followup_committed", followup_committed},
        {"committed_incorrect", committed_incorrect}}},
      {"examples", examples},
  };
  append_rate(j["inverse"], "violation_rate", violation_rate());
  append_rate(j["inverse"], "omission_rate", omission_rate());
  append_rate(j["inverse"], "misplacement_rate", misplacement_rate());
  append_rate(j["unknown_followup"], "commit_rate", commit_rate());
  append_rate(j["unknown_followup"], "incorrect_rate", incorrect_rate());
  return j;
}

std::string AuditReport::text_table() const {
  char line[160];
  std::string out;
  auto pct = [](std::optional<double> r) {
    if (!r) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", *r * 100.0);
    return std::string(buf);
  };
  std::snprintf(line, sizeof(line), "inverse audits   %ld\n", audited);
  out += line;
  std::snprintf(line, sizeof(line), "  consistent     %ld\n", consistent);
  out += line;
  std::snprintf(line, sizeof(line), "  omission       %ld (%s)\n", omission,
                pct(omission_rate()).c_str());
  out += line;
  std::snprintf(line, sizeof(line), "  misplacement   %ld (%s)\n", misplacement,
                pct(misplacement_rate()).c_str());
  out += line;
  std::snprintf(line, sizeof(line), "  violation rate %s\n", pct(violation_rate()).c_str());
  out += line;
  if (unaudited > 0) {
    std::snprintf(line, sizeof(line), "  unaudited      %ld\n", unaudited);
    out += line;
  }
  std::snprintf(line, sizeof(line), "followup probes  %ld\n", pairs_probed);
  out += line;
  std::snprintf(line, sizeof(line), "  unknown        %ld\n", followup_total);
  out += line;
  std::snprintf(line, sizeof(line), "  committed      %ld (%s)\n", followup_committed,
                pct(commit_rate()).c_str());
  out += line;
  std::snprintf(line, sizeof(line), "  incorrect      %ld (%s of commits)\n",
                committed_incorrect, pct(incorrect_rate()).c_str());
  out += line;
  return out;
}

std::vector<Assertion> dedupe_assertions(const std::vector<Assertion>& assertions,
                                         const RelationSchema& schema) {
  std::vector<std::string> order;
  std::map<std::string, const Assertion*> chosen;
  std::map<std::string, bool> chosen_canonical;
  for (const auto& a : assertions) {
    auto claim = normalize(a, schema);
    auto key = std::min(claim.subject, claim.object) + "\x1f" +
               std::max(claim.subject, claim.object);
    bool canonical = claim.subject < claim.object;
    auto it = chosen.find(key);
    if (it == chosen.end()) {
      chosen[key] = &a;
      chosen_canonical[key] = canonical;
      order.push_back(key);
    } else if (canonical && !chosen_canonical[key]) {
      it->second = &a;
      chosen_canonical[key] = true;
    }
  }
  std::vector<Assertion> out;
  out.reserve(order.size());
  for (const auto& key : order) out.push_back(*chosen.at(key));
  return out;
}

AuditReport audit_inverse(Gateway& gateway, const Corpus& corpus, const std::string& doc_id,
                          const std::vector<Assertion>& assertions,
                          const StrategyOptions& strategy_opts, const AuditOptions& opts) {
  const auto& schema = corpus.schema;
  std::vector<Rel> question_order;
  for (Rel r : schema.labels)
    if (schema.question_phrasings.count(r)) question_order.push_back(r);

  std::map<std::string, RankingResult> batteries;
  auto battery_for = [&](const std::string& subject) -> const RankingResult& {
    auto it = batteries.find(subject);
    if (it == batteries.end())
      it = batteries.emplace(subject, run_event_ranking(gateway, corpus, doc_id, subject,
                                                        strategy_opts))
               .first;
    return it->second;
  };
  auto listed_under = [&](const RankingResult& battery, Rel question,
                          const std::string& subject, const std::string& object) {
    for (const auto& a : battery.assertions) {
      if (a.relation != question) continue;
      if (question == Rel::include || question == Rel::is_included) {
        if (a.anchor == subject && a.other == object) return true;
      } else if (a.anchor == object && a.other == subject) {
        return true;
      }
    }
    return false;
  };

  AuditReport report;
  for (const auto& assertion : assertions) {
    auto claim = normalize(assertion, schema);
    const auto& battery = battery_for(claim.subject);
    if (battery.failed) {
      report.unaudited++;
      continue;
    }
    std::map<Rel, std::string> transcript_of;
    for (std::size_t i = 0; i < question_order.size() && i < battery.transcripts.size(); ++i)
      transcript_of[question_order[i]] = battery.transcripts[i];

    // the question whose list a consistent respondent must put the object in
    Rel expected = ranking_answer_relation(schema.inverse_of(claim.relation));
    report.audited++;
    if (listed_under(battery, expected, claim.subject, claim.object)) {
      report.consistent++;
      add_example(report, "consistent", transcript_of[expected], opts.max_examples);
      continue;
    }
    bool misplaced = false;
    for (Rel question : question_order) {
      if (question == expected) continue;
      if (listed_under(battery, question, claim.subject, claim.object)) {
        report.misplacement++;
        add_example(report, "misplacement", transcript_of[question], opts.max_examples);
        misplaced = true;
        break;
      }
    }
    if (!misplaced) {
      report.omission++;
      add_example(report, "omission", transcript_of[expected], opts.max_examples);
    }
  }
  return report;
}

AuditReport audit_unknown_followup(Gateway& gateway, const Corpus& corpus, const GoldPair& pair,
                                   const StrategyOptions& strategy_opts,
                                   const AuditOptions& opts) {
  const auto& schema = corpus.schema;
  if (!schema.cot_questions.count(opts.followup_first) ||
      !schema.cot_questions.count(opts.followup_second)) {
    throw GenerationError("schema " + schema.dataset_name +
                          " lacks a question for the follow-up audit pair");
  }
  const auto& doc = corpus.document(pair.doc_id);
  const auto* t1 = doc.find_trigger(pair.e1);
  const auto* t2 = doc.find_trigger(pair.e2);
  if (!t1 || !t2) throw GenerationError("pair does not resolve in document " + pair.doc_id);

  std::map<std::string, std::string> slots = {
      {"document", mark_events(doc, strategy_opts.tag_style)},
      {"e1", tagged_trigger(*t1, strategy_opts.tag_style)},
      {"e2", tagged_trigger(*t2, strategy_opts.tag_style)},
  };
  auto ask = [&](ChatTranscript& session, Rel relation) {
    auto prompt = render_prompt(schema.cot_questions.at(relation), slots,
                                strategy_opts.tag_style);
    QueryIntent intent;
    intent.kind = QueryKind::relation_yesno;
    intent.doc_id = pair.doc_id;
    intent.e1 = pair.e1;
    intent.e2 = pair.e2;
    intent.relation = relation;
    return parse_yesno(gateway.send(session, prompt, intent), &schema);
  };

  AuditReport report;
  report.pairs_probed = 1;
  auto session = gateway.open_session("audit_unknown", pair.doc_id, pair.e1, pair.e2);
  try {
    if (ask(session, opts.followup_first) == YesNo::unknown) {
      report.followup_total = 1;
      if (ask(session, opts.followup_second) == YesNo::yes) {
        report.followup_committed = 1;
        if (pair.label != opts.followup_second) {
          report.committed_incorrect = 1;
          add_example(report, "committed_incorrect", session.content_hash(), opts.max_examples);
        } else {
          add_example(report, "committed_correct", session.content_hash(), opts.max_examples);
        }
      }
    }
  } catch (const Error&) {
    report.unaudited = 1;
  }
  gateway.close_session(session);
  return report;
}

AuditReport audit_unknown_followups(Gateway& gateway, const Corpus& corpus,
                                    const std::vector<GoldPair>& pairs,
                                    const StrategyOptions& strategy_opts,
                                    const AuditOptions& opts) {
  AuditReport report;
  for (const auto& pair : pairs)
    report.merge(audit_unknown_followup(gateway, corpus, pair, strategy_opts, opts),
                 opts.max_examples);
  return report;
}

}  // namespace trex
