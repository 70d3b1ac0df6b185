#pragma once

#include <string>
#include <vector>

#include "trex/corpus.hpp"
#include "trex/schema.hpp"

namespace trex {

enum class ParseStatus { clean, fuzzy, abstain };
enum class YesNo { yes, no, unknown };

struct LabelVerdict {
  Rel label = Rel::vague;
  ParseStatus status = ParseStatus::abstain;
  bool ambiguous = false;  // two or more distinct non-inverse labels in one reply
  std::string raw_reply;
};

struct EventListVerdict {
  std::vector<std::string> events;  // resolved trigger ids, first mention order
  int dropped = 0;                  // mentions resolving to nothing
  int ambiguous = 0;                // surface strings matching several triggers
  ParseStatus status = ParseStatus::clean;
  std::string raw_reply;
};

// Replies the paper observed standing in for "I don't know"; extendable per
// schema. Matched case-insensitively.
bool is_refusal(const std::string& raw, const RelationSchema* schema = nullptr);

// Total: every reply maps to a schema label or vague. Precedence: refusal
// phrases, then multi-word labels, then single words. A reply naming two
// mutually inverse labels keeps the first mention (fuzzy); naming two
// unrelated labels abstains as ambiguous.
LabelVerdict parse_label(const std::string& raw, const RelationSchema& schema);

YesNo parse_yesno(const std::string& raw, const RelationSchema* schema = nullptr);

// Resolves a free-text event listing against the document's triggers: tagged
// mentions, bare trigger ids, then unique surface strings.
EventListVerdict parse_event_list(const std::string& raw, const Document& doc);

}  // namespace trex
