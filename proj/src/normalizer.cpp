#include "trex/normalizer.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "trex/util.hpp"

namespace trex {
namespace {

const char* kRefusalPhrases[] = {
    "cannot determine",
    "cannot answer",
    "unclear from the given information",
};

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool word_at(const std::string& text, std::size_t pos, std::size_t len) {
  if (pos > 0 && is_word_char(text[pos - 1])) return false;
  std::size_t end = pos + len;
  if (end < text.size() && is_word_char(text[end])) return false;
  return true;
}

// All word-boundary occurrences of needle in haystack (both already lowercase).
std::vector<std::size_t> find_word(const std::string& haystack, const std::string& needle) {
  std::vector<std::size_t> hits;
  if (needle.empty()) return hits;
  std::size_t pos = 0;
  while ((pos = haystack.find(needle, pos)) != std::string::npos) {
    if (word_at(haystack, pos, needle.size())) hits.push_back(pos);
    pos++;
  }
  return hits;
}

struct Token {
  std::string text;  // lowercase
  std::size_t begin;
  std::size_t end;
};

std::vector<Token> tokenize(const std::string& raw) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (is_word_char(raw[i])) {
      std::size_t start = i;
      while (i < raw.size() && is_word_char(raw[i])) i++;
      tokens.push_back({to_lower(raw.substr(start, i - start)), start, i});
    } else {
      i++;
    }
  }
  return tokens;
}

}  // namespace

bool is_refusal(const std::string& raw, const RelationSchema* schema) {
  std::string norm = to_lower(normalize_ws(raw));
  for (const char* phrase : kRefusalPhrases) {
    if (norm.find(phrase) != std::string::npos) return true;
  }
  if (!find_word(norm, "unknown").empty()) return true;
  if (schema) {
    for (const auto& phrase : schema->extra_refusal_phrases) {
      if (norm.find(to_lower(normalize_ws(phrase))) != std::string::npos) return true;
    }
  }
  return false;
}

LabelVerdict parse_label(const std::string& raw, const RelationSchema& schema) {
  LabelVerdict verdict;
  verdict.raw_reply = raw;
  if (is_refusal(raw, &schema)) {
    verdict.label = Rel::vague;
    verdict.status = ParseStatus::abstain;
    return verdict;
  }

  std::string norm = to_lower(normalize_ws(raw));

  struct Match {
    std::size_t begin;
    std::size_t len;
    Rel label;
  };
  std::vector<Match> matches;
  auto add_matches = [&](const std::string& phrase, Rel label) {
    for (std::size_t pos : find_word(norm, phrase)) matches.push_back({pos, phrase.size(), label});
  };
  for (Rel r : schema.output_space()) {
    add_matches(std::string(rel_name(r)), r);
    std::string display(rel_display(r));
    if (display != rel_name(r)) add_matches(display, r);
    auto syn = schema.synonyms.find(r);
    if (syn != schema.synonyms.end()) {
      for (const auto& alt : syn->second) add_matches(to_lower(normalize_ws(alt)), r);
    }
  }

  // longer matches win where they overlap ("is included" over an "included"
  // synonym), then earlier ones
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.len > b.len;
  });
  std::vector<Match> kept;
  for (const auto& m : matches) {
    bool overlapped = false;
    for (const auto& k : kept) {
      if (m.begin < k.begin + k.len && k.begin < m.begin + m.len) {
        overlapped = m.len <= k.len;
        if (!overlapped) {
          // longer later match displaces the shorter one
          kept.erase(std::remove_if(kept.begin(), kept.end(),
                                    [&](const Match& x) {
                                      return m.begin < x.begin + x.len && x.begin < m.begin + m.len;
                                    }),
                     kept.end());
        }
        break;
      }
    }
    if (!overlapped) kept.push_back(m);
  }

  std::vector<Rel> order;  // distinct labels by first mention
  for (const auto& m : kept) {
    if (std::find(order.begin(), order.end(), m.label) == order.end()) order.push_back(m.label);
  }

  if (order.empty()) {
    verdict.label = Rel::vague;
    verdict.status = ParseStatus::abstain;
  } else if (order.size() == 1) {
    verdict.label = order[0];
    verdict.status = ParseStatus::clean;
  } else if (order.size() == 2 && schema.inverse_of(order[0]) == order[1]) {
    // "e1 is before e2, i.e. e2 is after e1" — keep the first mention
    verdict.label = order[0];
    verdict.status = ParseStatus::fuzzy;
  } else {
    verdict.label = Rel::vague;
    verdict.status = ParseStatus::abstain;
    verdict.ambiguous = true;
  }
  return verdict;
}

YesNo parse_yesno(const std::string& raw, const RelationSchema* schema) {
  if (is_refusal(raw, schema)) return YesNo::unknown;
  std::string norm = to_lower(normalize_ws(raw));
  auto yes_hits = find_word(norm, "yes");
  auto no_hits = find_word(norm, "no");
  if (!yes_hits.empty() && (no_hits.empty() || yes_hits[0] < no_hits[0])) return YesNo::yes;
  if (!no_hits.empty()) return YesNo::no;
  return YesNo::unknown;
}

EventListVerdict parse_event_list(const std::string& raw, const Document& doc) {
  EventListVerdict verdict;
  verdict.raw_reply = raw;

  std::string norm = to_lower(normalize_ws(raw));
  {
    std::string bare = norm;
    bare.erase(std::remove_if(bare.begin(), bare.end(),
                              [](char c) { return !is_word_char(c) && c != ' '; }),
               bare.end());
    bare = trim(bare);
    if (bare == "none" || bare == "no events" || bare == "no event triggers" ||
        bare == "no other event triggers" || bare == "no other events") {
      return verdict;  // explicit empty list, clean
    }
  }
  if (is_refusal(raw)) {
    verdict.status = ParseStatus::abstain;
    return verdict;
  }

  auto push_id = [&](const std::string& id) {
    if (std::find(verdict.events.begin(), verdict.events.end(), id) == verdict.events.end()) {
      verdict.events.push_back(id);
    }
  };
  auto id_of = [&](const std::string& token) -> const EventTrigger* {
    for (const auto& t : doc.triggers) {
      if (to_lower(t.id) == token) return &t;
    }
    return nullptr;
  };

  std::vector<Token> tokens = tokenize(raw);
  std::vector<bool> claimed(tokens.size(), false);

  // pass 1: tag mentions and bare ids ("[EVENT e3]" tokenizes to the tag
  // keyword plus the id)
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].text == "event" || tokens[i].text == "events") {
      claimed[i] = true;  // tag keyword, not a mention
      continue;
    }
    if (const EventTrigger* t = id_of(tokens[i].text)) {
      push_id(t->id);
      claimed[i] = true;
    }
  }

  // pass 2: surface mentions, longest surfaces first
  std::map<std::string, std::vector<const EventTrigger*>> by_surface;
  for (const auto& t : doc.triggers) {
    by_surface[to_lower(normalize_ws(t.surface))].push_back(&t);
  }
  std::vector<std::pair<std::vector<std::string>, const std::vector<const EventTrigger*>*>> surfaces;
  for (const auto& [surface, triggers] : by_surface) {
    std::vector<std::string> words = split(surface, ' ');
    if (!words.empty()) surfaces.push_back({words, &triggers});
  }
  std::sort(surfaces.begin(), surfaces.end(),
            [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
  for (const auto& [words, triggers] : surfaces) {
    for (std::size_t i = 0; i + words.size() <= tokens.size(); ++i) {
      bool hit = true;
      for (std::size_t k = 0; k < words.size(); ++k) {
        if (claimed[i + k] || tokens[i + k].text != words[k]) {
          hit = false;
          break;
        }
      }
      if (!hit) continue;
      for (std::size_t k = 0; k < words.size(); ++k) claimed[i + k] = true;
      if (triggers->size() == 1) {
        push_id(triggers->front()->id);
      } else {
        verdict.ambiguous++;
      }
    }
  }

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!claimed[i]) verdict.dropped++;
  }
  if (verdict.dropped || verdict.ambiguous) verdict.status = ParseStatus::fuzzy;
  return verdict;
}

}  // namespace trex
