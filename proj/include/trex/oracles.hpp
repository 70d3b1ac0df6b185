#pragma once

#include <map>
#include <memory>
#include <vector>

#include "trex/corpus.hpp"
#include "trex/gateway.hpp"

namespace trex {

// Per-gold-label outcome distributions; rows must sum to 1.
using Confusion = std::map<Rel, std::vector<std::pair<Rel, double>>>;

// Answers every intent from the gold annotations.
std::shared_ptr<Provider> gold_oracle(std::shared_ptr<const Corpus> corpus);

// Gold behavior with the pair's label re-sampled through the confusion rows.
// One draw per unordered pair (keyed by seed and pair identity), so all query
// kinds stay mutually consistent and worker order never matters.
std::shared_ptr<Provider> noisy_oracle(std::shared_ptr<const Corpus> corpus, Confusion confusion,
                                       std::uint64_t seed);

// Answers only in the refusal phrases the paper lists.
std::shared_ptr<Provider> refusal_oracle();

// Reproduces both observed failure modes at tunable rates. Ranking queries
// anchored at the lower trigger id corrupt each answer with probability
// violation_rate (half omissions, half misplacements); the higher-id anchor
// direction stays clean, so audited assertions are gold. A relation_yesno
// gets "Unknown." on first ask; a follow-up on the same pair commits "Yes."
// at rates calibrated to hit commit_rate overall with incorrect_rate of
// commits wrong, given the corpus's label composition.
std::shared_ptr<Provider> inconsistent_oracle(std::shared_ptr<const Corpus> corpus,
                                              double violation_rate, std::uint64_t seed,
                                              double commit_rate = 0.84,
                                              double incorrect_rate = 0.96);

// Stand-in carrying the recorded run's provider/model ids so cache keys line
// up; any actual call means the recording is incomplete.
std::shared_ptr<Provider> replay_provider(const std::string& provider_id, const std::string& model_id);

}  // namespace trex
