#include "trex/metrics.hpp"

#include <cstdio>

#include "trex/errors.hpp"

namespace trex {

namespace {

double ratio(long num, long den) { return den == 0 ? 0.0 : double(num) / double(den); }

std::string pct(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", fraction * 100.0);
  return buf;
}

}  // namespace

double LabelTally::precision() const { return ratio(tp, tp + fp); }
double LabelTally::recall() const { return ratio(tp, tp + fn); }

// Same value as 2PR/(P+R) but computed on the counts, so round ratios like
// 1/5 survive without an extra rounding step.
double LabelTally::f1() const { return ratio(2 * tp, 2 * tp + fp + fn); }

// tp == 0 forces precision and recall to 0 (possibly 0/0), making F1 itself
// a 0/0 reported as 0.0.
bool LabelTally::degenerate() const { return tp == 0; }

EvalReport score(const std::vector<Prediction>& predictions, const std::vector<GoldPair>& gold,
                 const RelationSchema& schema, bool include_vague_overall) {
  auto key = [](const std::string& doc, const std::string& a, const std::string& b) {
    return doc + "\x1f" + a + "\x1f" + b;
  };
  std::map<std::string, const Prediction*> by_pair;
  for (const auto& pred : predictions) {
    if (!schema.in_output_space(pred.label)) {
      throw ScoringError("prediction label " + std::string(rel_name(pred.label)) +
                         " is outside the schema output space");
    }
    auto [it, fresh] = by_pair.emplace(key(pred.doc_id, pred.e1, pred.e2), &pred);
    if (!fresh) {
      throw ScoringError("duplicate prediction for pair (" + pred.doc_id + ", " + pred.e1 +
                         ", " + pred.e2 + ")");
    }
  }

  EvalReport report;
  report.dataset_name = schema.dataset_name;
  report.gold_pairs = (long)gold.size();
  report.predictions = (long)predictions.size();
  report.vague_in_overall = include_vague_overall;

  std::map<Rel, LabelTally> tallies;
  for (Rel r : schema.output_space()) tallies[r] = {r, 0, 0, 0};

  std::set<std::string> claimed;
  for (const auto& pair : gold) {
    auto it = by_pair.find(key(pair.doc_id, pair.e1, pair.e2));
    if (it == by_pair.end()) {
      throw ScoringError("no prediction for gold pair (" + pair.doc_id + ", " + pair.e1 +
                         ", " + pair.e2 + ")");
    }
    claimed.insert(it->first);
    Rel predicted = it->second->label;
    if (predicted == pair.label) {
      tallies[predicted].tp++;
    } else {
      tallies[predicted].fp++;
      tallies[pair.label].fn++;
    }
  }
  if (claimed.size() != by_pair.size()) {
    for (const auto& [k, pred] : by_pair) {
      if (!claimed.count(k)) {
        throw ScoringError("prediction for unknown pair (" + pred->doc_id + ", " + pred->e1 +
                           ", " + pred->e2 + ")");
      }
    }
  }

  for (Rel r : schema.output_space()) {
    const auto& tally = tallies[r];
    report.per_label.push_back(tally);
    if (!include_vague_overall && r == Rel::vague) continue;
    report.overall.tp += tally.tp;
    report.overall.fp += tally.fp;
    report.overall.fn += tally.fn;
  }

  for (const auto& pred : predictions) {
    if (pred.conflict_vague) report.flag_counts["conflict_vague"]++;
    if (pred.undetected_vague) report.flag_counts["undetected_vague"]++;
    if (pred.abstain_vague) report.flag_counts["abstain_vague"]++;
    if (pred.truncated_context) report.flag_counts["truncated_context"]++;
    if (pred.same_event) report.flag_counts["same_event"]++;
    if (pred.failed) report.flag_counts["failed"]++;
  }
  return report;
}

nlohmann::json EvalReport::to_json() const {
  auto tally_json = [](const LabelTally& t) {
    return nlohmann::json{{"tp", t.tp},
                          {"fp", t.fp},
                          {"fn", t.fn},
                          {"precision", t.precision()},
                          {"recall", t.recall()},
                          {"f1", t.f1()},
                          {"degenerate", t.degenerate()}};
  };
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& t : per_label) labels[std::string(rel_name(t.label))] = tally_json(t);
  return {{"dataset", dataset_name},
          {"gold_pairs", gold_pairs},
          {"predictions", predictions},
          {"vague_in_overall", vague_in_overall},
          {"overall", tally_json(overall)},
          {"labels", labels},
          {"flags", flag_counts}};
}

std::string EvalReport::text_table() const {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof(line), "%-14s %7s %7s %7s\n", "relation", "prec", "recall", "f1");
  out += line;
  auto row = [&](const std::string& name, const LabelTally& t) {
    std::snprintf(line, sizeof(line), "%-14s %7s %7s %7s\n", name.c_str(),
                  pct(t.precision()).c_str(), pct(t.recall()).c_str(), pct(t.f1()).c_str());
    out += line;
  };
  row(vague_in_overall ? "overall" : "overall*", overall);
  for (const auto& t : per_label) row(std::string(rel_name(t.label)), t);
  return out;
}

}  // namespace trex
