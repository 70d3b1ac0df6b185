#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "trex/corpus.hpp"
#include "trex/schema.hpp"
#include "trex/strategies.hpp"

namespace trex {

struct LabelTally {
  Rel label = Rel::vague;
  long tp = 0;
  long fp = 0;
  long fn = 0;

  // 0/0 ratios come back as 0.0; degenerate() says that happened.
  double precision() const;
  double recall() const;
  double f1() const;
  bool degenerate() const;
};

struct EvalReport {
  std::string dataset_name;
  std::vector<LabelTally> per_label;  // output-space order
  long gold_pairs = 0;
  long predictions = 0;
  bool vague_in_overall = true;
  LabelTally overall;  // micro pool; label field unused
  std::map<std::string, long> flag_counts;

  nlohmann::json to_json() const;
  // Relation rows after an overall row, percentages with one decimal.
  std::string text_table() const;
};

EvalReport score(const std::vector<Prediction>& predictions, const std::vector<GoldPair>& gold,
                 const RelationSchema& schema, bool include_vague_overall = true);

}  // namespace trex
