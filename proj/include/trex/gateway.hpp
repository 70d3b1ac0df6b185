#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "trex/corpus.hpp"
#include "trex/schema.hpp"

namespace trex {

enum class QueryKind { relation_multiclass, relation_yesno, same_event, event_ranking };

std::string query_kind_name(QueryKind kind);

// Travels alongside every prompt so simulated oracles answer from structure,
// never by parsing prompt text. Live providers ignore it.
struct QueryIntent {
  QueryKind kind = QueryKind::relation_multiclass;
  std::string doc_id;
  std::string e1;      // pair queries; event_ranking leaves it empty
  std::string e2;
  std::string anchor;  // event_ranking only
  std::optional<Rel> relation;

  void validate() const;
  nlohmann::json to_json() const;
  static QueryIntent from_json(const nlohmann::json& j);
};

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;
};

struct ChatTranscript {
  std::vector<ChatMessage> messages;
  std::vector<QueryIntent> turn_intents;  // one per user turn
  std::string provider_id;
  std::string model_id;
  std::string strategy_id;
  std::string doc_id;
  std::string e1;
  std::string e2;
  std::string started_at;   // timestamps stay out of content hashes
  std::string finished_at;

  void validate() const;
  nlohmann::json to_json() const;
  static ChatTranscript from_json(const nlohmann::json& j);
  std::string content_hash() const;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string id() const = 0;
  virtual std::string model() const = 0;
  // session holds all turns before this one; message is the current user turn.
  virtual std::string complete(const ChatTranscript& session, const ChatMessage& message,
                               const QueryIntent& intent) = 0;
};

// Stable across runs and platforms; any byte change in an input changes it.
std::string cache_key(const std::string& provider_id, const std::string& model_id,
                      const std::vector<ChatMessage>& history, const std::string& message);

struct GatewayOptions {
  std::filesystem::path cache_dir;       // empty disables the reply cache
  std::filesystem::path transcript_dir;  // empty disables transcript persistence
  bool read_cache = true;
  bool write_cache = true;
};

// Owns caching and transcript persistence around a provider. Sessions are
// sequential; distinct sessions may run on different workers concurrently.
class Gateway {
 public:
  Gateway(std::shared_ptr<Provider> provider, GatewayOptions options);

  ChatTranscript open_session(const std::string& strategy_id, const std::string& doc_id,
                              const std::string& e1, const std::string& e2) const;
  std::string send(ChatTranscript& session, const std::string& message, const QueryIntent& intent);
  // Stamps finished_at and writes the transcript file; returns its path if
  // persistence is on.
  std::optional<std::filesystem::path> close_session(ChatTranscript& session);

  std::uint64_t provider_calls() const { return provider_calls_.load(); }
  std::uint64_t cache_hits() const { return cache_hits_.load(); }
  const GatewayOptions& options() const { return options_; }
  Provider& provider() { return *provider_; }

 private:
  std::shared_ptr<Provider> provider_;
  GatewayOptions options_;
  std::atomic<std::uint64_t> provider_calls_{0};
  std::atomic<std::uint64_t> cache_hits_{0};
};

}  // namespace trex
