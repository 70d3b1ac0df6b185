#include "trex/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "trex/errors.hpp"
#include "trex/util.hpp"

namespace trex {
namespace {

std::string join_ids(const std::vector<std::string>& ids) {
  if (ids.empty()) return "None.";
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ", ";
    out += ids[i];
  }
  return out;
}

// Shared gold-pair index: oriented label lookup for any ordered id pair.
class CorpusOracle : public Provider {
 public:
  explicit CorpusOracle(std::shared_ptr<const Corpus> corpus) : corpus_(std::move(corpus)) {
    if (!corpus_) throw OracleError("oracle needs a corpus");
    for (const auto& p : corpus_->pairs) {
      gold_[p.doc_id][{p.e1, p.e2}] = p.label;
      gold_[p.doc_id][{p.e2, p.e1}] = corpus_->schema.inverse_of(p.label);
    }
  }

  std::string model() const override { return "sim"; }

 protected:
  std::optional<Rel> gold_label(const std::string& doc_id, const std::string& a,
                                const std::string& b) const {
    auto doc = gold_.find(doc_id);
    if (doc == gold_.end()) return std::nullopt;
    auto it = doc->second.find({a, b});
    if (it == doc->second.end()) return std::nullopt;
    return it->second;
  }

  const Document& doc(const QueryIntent& intent) const { return corpus_->document(intent.doc_id); }

  bool same_event_answer(const QueryIntent& intent) const {
    return doc(intent).coreferent_pair(intent.e1, intent.e2);
  }

  const Corpus& corpus() const { return *corpus_; }

 private:
  std::shared_ptr<const Corpus> corpus_;
  std::map<std::string, std::map<std::pair<std::string, std::string>, Rel>> gold_;
};

class GoldOracle : public CorpusOracle {
 public:
  using CorpusOracle::CorpusOracle;
  std::string id() const override { return "oracle:gold"; }

  std::string complete(const ChatTranscript&, const ChatMessage&, const QueryIntent& intent) override {
    intent.validate();
    switch (intent.kind) {
      case QueryKind::relation_multiclass: {
        auto label = gold_label(intent.doc_id, intent.e1, intent.e2);
        return std::string(rel_display(label.value_or(Rel::vague)));
      }
      case QueryKind::relation_yesno: {
        auto label = gold_label(intent.doc_id, intent.e1, intent.e2);
        return label && *label == *intent.relation ? "Yes." : "No.";
      }
      case QueryKind::same_event:
        return same_event_answer(intent) ? "Yes." : "No.";
      case QueryKind::event_ranking: {
        Rel want = ranking_answer_relation(*intent.relation);
        std::vector<std::string> ids;
        for (const auto& t : doc(intent).triggers) {
          if (t.id == intent.anchor) continue;
          auto label = gold_label(intent.doc_id, t.id, intent.anchor);
          if (label && *label == want) ids.push_back(t.id);
        }
        return join_ids(ids);
      }
    }
    throw OracleError("unsupported intent kind");
  }
};

class NoisyOracle : public CorpusOracle {
 public:
  NoisyOracle(std::shared_ptr<const Corpus> corpus, Confusion confusion, std::uint64_t seed)
      : CorpusOracle(std::move(corpus)), confusion_(std::move(confusion)), seed_(seed) {
    for (const auto& [gold, row] : confusion_) {
      double sum = 0;
      for (const auto& [outcome, p] : row) {
        if (p < 0) throw OracleError("negative probability in confusion row");
        if (!this->corpus().schema.in_output_space(outcome)) {
          throw OracleError("confusion outcome outside the schema output space");
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw OracleError("confusion row for " + std::string(rel_name(gold)) + " sums to " +
                          std::to_string(sum));
      }
    }
    confusion_hash_ = sha256_hex([&] {
      std::string repr;
      for (const auto& [gold, row] : confusion_) {
        repr += std::string(rel_name(gold)) + ":";
        for (const auto& [outcome, p] : row) {
          repr += std::string(rel_name(outcome)) + "=" + std::to_string(p) + ",";
        }
        repr += ";";
      }
      return repr;
    }()).substr(0, 12);
  }

  std::string id() const override { return "oracle:noisy"; }
  std::string model() const override {
    return "sim;seed=" + std::to_string(seed_) + ";conf=" + confusion_hash_;
  }

  std::string complete(const ChatTranscript&, const ChatMessage&, const QueryIntent& intent) override {
    intent.validate();
    switch (intent.kind) {
      case QueryKind::relation_multiclass: {
        auto label = sampled_label(intent.doc_id, intent.e1, intent.e2);
        return std::string(rel_display(label.value_or(Rel::vague)));
      }
      case QueryKind::relation_yesno: {
        auto label = sampled_label(intent.doc_id, intent.e1, intent.e2);
        return label && *label == *intent.relation ? "Yes." : "No.";
      }
      case QueryKind::same_event:
        return same_event_answer(intent) ? "Yes." : "No.";
      case QueryKind::event_ranking: {
        Rel want = ranking_answer_relation(*intent.relation);
        std::vector<std::string> ids;
        for (const auto& t : doc(intent).triggers) {
          if (t.id == intent.anchor) continue;
          auto label = sampled_label(intent.doc_id, t.id, intent.anchor);
          if (label && *label == want) ids.push_back(t.id);
        }
        return join_ids(ids);
      }
    }
    throw OracleError("unsupported intent kind");
  }

 private:
  // One draw per unordered pair; the queried orientation sees the sample
  // through the inverse map.
  std::optional<Rel> sampled_label(const std::string& doc_id, const std::string& a,
                                   const std::string& b) {
    const std::string& lo = std::min(a, b);
    const std::string& hi = std::max(a, b);
    auto gold = gold_label(doc_id, lo, hi);
    if (!gold) return std::nullopt;
    auto row = confusion_.find(*gold);
    Rel sampled = *gold;
    if (row != confusion_.end()) {
      double draw = unit_draw("noisy|" + std::to_string(seed_) + "|" + doc_id + "|" + lo + "|" + hi);
      double cumulative = 0;
      for (const auto& [outcome, p] : row->second) {
        cumulative += p;
        if (draw < cumulative) {
          sampled = outcome;
          break;
        }
      }
    }
    return a == lo ? sampled : corpus().schema.inverse_of(sampled);
  }

  Confusion confusion_;
  std::uint64_t seed_;
  std::string confusion_hash_;
};

class RefusalOracle : public Provider {
 public:
  std::string id() const override { return "oracle:refusal"; }
  std::string model() const override { return "sim"; }

  std::string complete(const ChatTranscript&, const ChatMessage&, const QueryIntent& intent) override {
    intent.validate();
    switch (intent.kind) {
      case QueryKind::relation_multiclass: {
        static const char* phrases[] = {
            "Cannot determine.",
            "I cannot answer that question as it is unclear from the given information.",
            "Unknown.",
        };
        auto pick = stable_hash64("refusal|" + intent.doc_id + "|" + intent.e1 + "|" + intent.e2) % 3;
        return phrases[pick];
      }
      case QueryKind::relation_yesno:
        return "Unknown.";
      case QueryKind::same_event:
      case QueryKind::event_ranking:
        return "Cannot determine.";
    }
    throw OracleError("unsupported intent kind");
  }
};

class InconsistentOracle : public CorpusOracle {
 public:
  InconsistentOracle(std::shared_ptr<const Corpus> corpus, double violation_rate, std::uint64_t seed,
                     double commit_rate, double incorrect_rate)
      : CorpusOracle(std::move(corpus)),
        violation_rate_(violation_rate),
        seed_(seed),
        commit_rate_(commit_rate),
        incorrect_rate_(incorrect_rate) {
    if (violation_rate < 0 || violation_rate > 1) throw OracleError("violation_rate outside [0,1]");
    if (commit_rate < 0 || commit_rate > 1) throw OracleError("commit_rate outside [0,1]");
    if (incorrect_rate < 0 || incorrect_rate > 1) throw OracleError("incorrect_rate outside [0,1]");
  }

  std::string id() const override { return "oracle:inconsistent"; }
  std::string model() const override {
    return "sim;seed=" + std::to_string(seed_) + ";viol=" + std::to_string(violation_rate_) +
           ";commit=" + std::to_string(commit_rate_) + ";bad=" + std::to_string(incorrect_rate_);
  }

  std::string complete(const ChatTranscript& session, const ChatMessage&,
                       const QueryIntent& intent) override {
    intent.validate();
    switch (intent.kind) {
      case QueryKind::relation_multiclass: {
        auto label = gold_label(intent.doc_id, intent.e1, intent.e2);
        return std::string(rel_display(label.value_or(Rel::vague)));
      }
      case QueryKind::same_event:
        return same_event_answer(intent) ? "Yes." : "No.";
      case QueryKind::relation_yesno:
        return yesno(session, intent);
      case QueryKind::event_ranking:
        return ranking(intent);
    }
    throw OracleError("unsupported intent kind");
  }

 private:
  std::string draw_key(const char* tag, const QueryIntent& intent, const std::string& other) const {
    return std::string(tag) + "|" + std::to_string(seed_) + "|" + intent.doc_id + "|" + intent.anchor +
           "|" + other;
  }

  std::string ranking(const QueryIntent& intent) {
    Rel want = ranking_answer_relation(*intent.relation);
    const auto& schema = corpus().schema;
    std::vector<std::string> ids;
    for (const auto& t : doc(intent).triggers) {
      if (t.id == intent.anchor) continue;
      auto label = gold_label(intent.doc_id, t.id, intent.anchor);
      if (!label || *label == Rel::vague) continue;
      bool include = (*label == want);
      // only the low-anchor direction misbehaves; batteries anchored at the
      // higher id answer from gold, so recorded assertions stay clean
      if (intent.anchor < t.id && violation_rate_ > 0 &&
          unit_draw(draw_key("viol", intent, t.id)) < violation_rate_) {
        bool omit = unit_draw(draw_key("mode", intent, t.id)) < 0.5;
        std::vector<Rel> wrong;
        for (Rel q : schema.queryable) {
          if (ranking_answer_relation(q) != *label) wrong.push_back(q);
        }
        if (omit || wrong.empty()) {
          include = false;
        } else {
          Rel target = wrong[stable_hash64(draw_key("target", intent, t.id)) % wrong.size()];
          include = (ranking_answer_relation(target) == want);
        }
      }
      if (include) ids.push_back(t.id);
    }
    return join_ids(ids);
  }

  std::string yesno(const ChatTranscript& session, const QueryIntent& intent) {
    bool followup = false;
    for (const auto& prior : session.turn_intents) {
      if (prior.kind != QueryKind::relation_yesno) continue;
      if ((prior.e1 == intent.e1 && prior.e2 == intent.e2) ||
          (prior.e1 == intent.e2 && prior.e2 == intent.e1)) {
        followup = true;
        break;
      }
    }
    if (!followup) return "Unknown.";

    Rel asked = *intent.relation;
    auto gold = gold_label(intent.doc_id, intent.e1, intent.e2);
    bool gold_matches = gold && *gold == asked;
    double w = wrong_fraction(asked);
    double p_commit;
    if (gold_matches) {
      if (1.0 - w <= 0) throw OracleError("no pairs with gold == asked relation; rate unreachable");
      p_commit = commit_rate_ * (1.0 - incorrect_rate_) / (1.0 - w);
    } else {
      if (w <= 0) throw OracleError("no pairs with gold != asked relation; rate unreachable");
      p_commit = commit_rate_ * incorrect_rate_ / w;
    }
    if (p_commit > 1.0 + 1e-12) {
      throw OracleError("commit/incorrect rates unreachable with this corpus composition (needs " +
                        std::to_string(p_commit) + " > 1)");
    }
    std::string key = "commit|" + std::to_string(seed_) + "|" + intent.doc_id + "|" + intent.e1 + "|" +
                      intent.e2;
    return unit_draw(key) < p_commit ? "Yes." : "Cannot determine.";
  }

  // fraction of gold pairs whose stored label differs from r
  double wrong_fraction(Rel r) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = wrong_fraction_.find(r);
    if (it != wrong_fraction_.end()) return it->second;
    std::size_t total = corpus().pairs.size();
    if (total == 0) throw OracleError("inconsistent oracle needs gold pairs");
    std::size_t wrong = 0;
    for (const auto& p : corpus().pairs) {
      if (p.label != r) wrong++;
    }
    double w = static_cast<double>(wrong) / static_cast<double>(total);
    wrong_fraction_[r] = w;
    return w;
  }

  double violation_rate_;
  std::uint64_t seed_;
  double commit_rate_;
  double incorrect_rate_;
  std::mutex mutex_;
  std::map<Rel, double> wrong_fraction_;
};

class ReplayProvider : public Provider {
 public:
  ReplayProvider(std::string provider_id, std::string model_id)
      : provider_id_(std::move(provider_id)), model_id_(std::move(model_id)) {}

  std::string id() const override { return provider_id_; }
  std::string model() const override { return model_id_; }

  std::string complete(const ChatTranscript&, const ChatMessage& message,
                       const QueryIntent& intent) override {
    throw GatewayError("replay miss: no recorded reply for a " + query_kind_name(intent.kind) +
                       " query in document " + intent.doc_id +
                       " (the recording does not cover this run)");
  }

 private:
  std::string provider_id_;
  std::string model_id_;
};

}  // namespace

std::shared_ptr<Provider> gold_oracle(std::shared_ptr<const Corpus> corpus) {
  return std::make_shared<GoldOracle>(std::move(corpus));
}

std::shared_ptr<Provider> noisy_oracle(std::shared_ptr<const Corpus> corpus, Confusion confusion,
                                       std::uint64_t seed) {
  return std::make_shared<NoisyOracle>(std::move(corpus), std::move(confusion), seed);
}

std::shared_ptr<Provider> refusal_oracle() { return std::make_shared<RefusalOracle>(); }

std::shared_ptr<Provider> inconsistent_oracle(std::shared_ptr<const Corpus> corpus,
                                              double violation_rate, std::uint64_t seed,
                                              double commit_rate, double incorrect_rate) {
  return std::make_shared<InconsistentOracle>(std::move(corpus), violation_rate, seed, commit_rate,
                                              incorrect_rate);
}

std::shared_ptr<Provider> replay_provider(const std::string& provider_id, const std::string& model_id) {
  return std::make_shared<ReplayProvider>(provider_id, model_id);
}

}  // namespace trex
