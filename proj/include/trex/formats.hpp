#pragma once

#include <array>
#include <filesystem>

#include "trex/corpus.hpp"

namespace trex {

// Pair list as tab-separated doc_id, e1, e2, label; document text comes from
// TimeML files named <doc_id>.tml under timeml_dir.
Corpus load_matres_tsv(const std::filesystem::path& pairs_path, const RelationSchema& schema,
                       const std::filesystem::path& timeml_dir);

// Same layout; labels may also use the single-letter codes b/a/i/ii/s.
Corpus load_tdd_tsv(const std::filesystem::path& pairs_path, const RelationSchema& schema,
                    const std::filesystem::path& timeml_dir);

// Directory of .tml files; event-event TLINKs become gold pairs and IDENTITY
// links become coreferent annotations.
Corpus load_timeml_dir(const std::filesystem::path& dir, const RelationSchema& schema);

// One parsed TimeML file: text with events resolved to character spans.
Document parse_timeml_file(const std::filesystem::path& path);

struct TimemlLinks {
  // TLINKs between two events, as (eiid-or-eid source, target, relType)
  std::vector<std::array<std::string, 3>> event_links;
  std::vector<std::pair<std::string, std::string>> identity_links;
};
TimemlLinks parse_timeml_links(const std::filesystem::path& path);

}  // namespace trex
