#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "trex/corpus.hpp"
#include "trex/gateway.hpp"
#include "trex/schema.hpp"
#include "trex/strategies.hpp"

namespace trex {

struct AuditOptions {
  // Ordered question pair for the unknown-then-commit probe.
  Rel followup_first = Rel::before;
  Rel followup_second = Rel::after;
  int max_examples = 3;  // transcript refs kept per category
};

struct AuditReport {
  // inverse-query audit over assertions
  long audited = 0;
  long consistent = 0;
  long omission = 0;      // counterpart list misses the event
  long misplacement = 0;  // event shows up in a non-inverse list
  long unaudited = 0;     // gateway failures

  // unknown-then-commit audit over pairs
  long pairs_probed = 0;
  long followup_total = 0;      // first question answered unknown
  long followup_committed = 0;  // follow-up answered yes anyway
  long committed_incorrect = 0;

  std::map<std::string, std::vector<std::string>> examples;

  // Rates are absent rather than 0/0 when their denominator is empty.
  std::optional<double> violation_rate() const;
  std::optional<double> omission_rate() const;
  std::optional<double> misplacement_rate() const;
  std::optional<double> commit_rate() const;
  std::optional<double> incorrect_rate() const;

  void merge(const AuditReport& other, int max_examples = 3);
  nlohmann::json to_json() const;
  std::string text_table() const;
};

// One audit per unordered pair: assertions are normalized so the claim reads
// subject-relation-object, and the representative with subject < object wins
// (the flipped one stands in when no such claim exists).
std::vector<Assertion> dedupe_assertions(const std::vector<Assertion>& assertions,
                                         const RelationSchema& schema);

// Re-asks the ranking battery from the other end of every assertion and
// checks the original anchor lands in the counterpart list.
AuditReport audit_inverse(Gateway& gateway, const Corpus& corpus, const std::string& doc_id,
                          const std::vector<Assertion>& assertions,
                          const StrategyOptions& strategy_opts = {},
                          const AuditOptions& opts = {});

// Asks r1's yes/no question; on an unknown, presses r2 in the same session
// and records whether the provider commits to it regardless.
AuditReport audit_unknown_followup(Gateway& gateway, const Corpus& corpus, const GoldPair& pair,
                                   const StrategyOptions& strategy_opts = {},
                                   const AuditOptions& opts = {});

AuditReport audit_unknown_followups(Gateway& gateway, const Corpus& corpus,
                                    const std::vector<GoldPair>& pairs,
                                    const StrategyOptions& strategy_opts = {},
                                    const AuditOptions& opts = {});

}  // namespace trex
