#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "trex/corpus.hpp"

namespace trex {

struct FixtureRelation {
  std::string e1;
  std::string e2;
  Rel label = Rel::vague;
};

struct FixtureDoc {
  std::string doc_id;
  std::vector<std::string> events;
  std::vector<FixtureRelation> relations;
  // rendered with the started/ended surface pattern and a shared subject
  std::vector<std::pair<std::string, std::string>> coreferent;
};

struct FixtureSpec {
  std::string dataset;
  std::uint64_t seed = 0;  // default for generation when no seed is passed
  std::vector<FixtureDoc> documents;

  void validate() const;
  nlohmann::json to_json() const;
  static FixtureSpec from_json(const nlohmann::json& j);
};

FixtureSpec load_fixture_spec(const std::filesystem::path& path);

// Deterministic synthetic corpus: one sentence per event in listed order,
// trigger surfaces unique within each document, sentence wording drawn from
// the seed. Same spec and seed always yield byte-identical serialized output.
Corpus generate_fixture(const FixtureSpec& spec, std::uint64_t seed);
Corpus generate_fixture(const FixtureSpec& spec);  // uses spec.seed

}  // namespace trex
