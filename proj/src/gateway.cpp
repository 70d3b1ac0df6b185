#include "trex/gateway.hpp"

#include "trex/errors.hpp"
#include "trex/util.hpp"

namespace trex {

std::string query_kind_name(QueryKind kind) {
  switch (kind) {
    case QueryKind::relation_multiclass: return "relation_multiclass";
    case QueryKind::relation_yesno: return "relation_yesno";
    case QueryKind::same_event: return "same_event";
    case QueryKind::event_ranking: return "event_ranking";
  }
  throw GatewayError("bad query kind value");
}

namespace {

QueryKind query_kind_from_name(const std::string& name) {
  if (name == "relation_multiclass") return QueryKind::relation_multiclass;
  if (name == "relation_yesno") return QueryKind::relation_yesno;
  if (name == "same_event") return QueryKind::same_event;
  if (name == "event_ranking") return QueryKind::event_ranking;
  throw GatewayError("unknown query kind \"" + name + "\"");
}

}  // namespace

void QueryIntent::validate() const {
  if (doc_id.empty()) throw GatewayError("query intent without doc_id");
  switch (kind) {
    case QueryKind::relation_multiclass:
    case QueryKind::same_event:
      if (e1.empty() || e2.empty()) {
        throw GatewayError(query_kind_name(kind) + " intent needs both pair ids");
      }
      break;
    case QueryKind::relation_yesno:
      if (e1.empty() || e2.empty() || !relation) {
        throw GatewayError("relation_yesno intent needs a pair and a relation");
      }
      break;
    case QueryKind::event_ranking:
      if (anchor.empty() || !relation) {
        throw GatewayError("event_ranking intent needs an anchor and a relation");
      }
      break;
  }
}

nlohmann::json QueryIntent::to_json() const {
  nlohmann::json j;
  j["kind"] = query_kind_name(kind);
  j["doc_id"] = doc_id;
  if (!e1.empty()) j["e1"] = e1;
  if (!e2.empty()) j["e2"] = e2;
  if (!anchor.empty()) j["anchor"] = anchor;
  if (relation) j["relation"] = std::string(rel_name(*relation));
  return j;
}

QueryIntent QueryIntent::from_json(const nlohmann::json& j) {
  QueryIntent intent;
  intent.kind = query_kind_from_name(j.at("kind").get<std::string>());
  intent.doc_id = j.at("doc_id").get<std::string>();
  if (j.contains("e1")) intent.e1 = j.at("e1").get<std::string>();
  if (j.contains("e2")) intent.e2 = j.at("e2").get<std::string>();
  if (j.contains("anchor")) intent.anchor = j.at("anchor").get<std::string>();
  if (j.contains("relation")) {
    auto r = rel_from_name(j.at("relation").get<std::string>());
    if (!r) throw GatewayError("unknown relation in stored intent");
    intent.relation = *r;
  }
  intent.validate();
  return intent;
}

void ChatTranscript::validate() const {
  std::size_t i = 0;
  if (i < messages.size() && messages[i].role == "system") i++;
  bool expect_user = true;
  std::size_t user_turns = 0;
  for (; i < messages.size(); ++i) {
    const auto& m = messages[i];
    if (m.role != "user" && m.role != "assistant") {
      throw GatewayError("unexpected role \"" + m.role + "\" in transcript");
    }
    if ((m.role == "user") != expect_user) {
      throw GatewayError("transcript roles do not alternate user/assistant");
    }
    if (m.content.empty()) throw GatewayError("empty " + m.role + " message in transcript");
    if (m.role == "user") user_turns++;
    expect_user = !expect_user;
  }
  if (turn_intents.size() > user_turns) {
    throw GatewayError("transcript has more intents than user turns");
  }
}

nlohmann::json ChatTranscript::to_json() const {
  nlohmann::json j;
  j["provider"] = provider_id;
  j["model"] = model_id;
  j["strategy"] = strategy_id;
  j["doc_id"] = doc_id;
  if (!e1.empty()) j["e1"] = e1;
  if (!e2.empty()) j["e2"] = e2;
  auto msgs = nlohmann::json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  j["messages"] = msgs;
  auto intents = nlohmann::json::array();
  for (const auto& intent : turn_intents) intents.push_back(intent.to_json());
  j["intents"] = intents;
  if (!started_at.empty()) j["started_at"] = started_at;
  if (!finished_at.empty()) j["finished_at"] = finished_at;
  return j;
}

ChatTranscript ChatTranscript::from_json(const nlohmann::json& j) {
  ChatTranscript t;
  t.provider_id = j.value("provider", "");
  t.model_id = j.value("model", "");
  t.strategy_id = j.value("strategy", "");
  t.doc_id = j.value("doc_id", "");
  t.e1 = j.value("e1", "");
  t.e2 = j.value("e2", "");
  for (const auto& m : j.at("messages")) {
    t.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  }
  if (j.contains("intents")) {
    for (const auto& intent : j.at("intents")) t.turn_intents.push_back(QueryIntent::from_json(intent));
  }
  t.started_at = j.value("started_at", "");
  t.finished_at = j.value("finished_at", "");
  t.validate();
  return t;
}

std::string ChatTranscript::content_hash() const {
  nlohmann::json j = to_json();
  j.erase("started_at");
  j.erase("finished_at");
  return sha256_hex(j.dump());
}

std::string cache_key(const std::string& provider_id, const std::string& model_id,
                      const std::vector<ChatMessage>& history, const std::string& message) {
  nlohmann::json j;
  j["provider"] = provider_id;
  j["model"] = model_id;
  auto msgs = nlohmann::json::array();
  for (const auto& m : history) msgs.push_back({{"role", m.role}, {"content", m.content}});
  j["history"] = msgs;
  j["message"] = message;
  return sha256_hex(j.dump());
}

Gateway::Gateway(std::shared_ptr<Provider> provider, GatewayOptions options)
    : provider_(std::move(provider)), options_(std::move(options)) {
  if (!provider_) throw GatewayError("gateway needs a provider");
}

ChatTranscript Gateway::open_session(const std::string& strategy_id, const std::string& doc_id,
                                     const std::string& e1, const std::string& e2) const {
  ChatTranscript session;
  session.provider_id = provider_->id();
  session.model_id = provider_->model();
  session.strategy_id = strategy_id;
  session.doc_id = doc_id;
  session.e1 = e1;
  session.e2 = e2;
  session.started_at = iso8601_now();
  return session;
}

std::string Gateway::send(ChatTranscript& session, const std::string& message,
                          const QueryIntent& intent) {
  if (message.empty()) throw GatewayError("refusing to send an empty message");
  intent.validate();

  std::string key = cache_key(session.provider_id, session.model_id, session.messages, message);
  std::string reply;
  bool from_cache = false;
  if (!options_.cache_dir.empty() && options_.read_cache) {
    auto path = options_.cache_dir / (key + ".json");
    if (std::filesystem::exists(path)) {
      try {
        reply = nlohmann::json::parse(read_file(path)).at("reply").get<std::string>();
        from_cache = true;
        cache_hits_++;
      } catch (const std::exception& e) {
        throw GatewayError("corrupt cache entry " + path.string() + ": " + e.what());
      }
    }
  }
  if (!from_cache) {
    ChatMessage user{"user", message};
    reply = provider_->complete(session, user, intent);
    provider_calls_++;
    if (reply.empty()) {
      throw EmptyReplyError("provider returned an empty reply for " + query_kind_name(intent.kind) +
                            " in document " + intent.doc_id);
    }
    if (!options_.cache_dir.empty() && options_.write_cache) {
      nlohmann::json entry;
      entry["reply"] = reply;
      write_file_atomic(options_.cache_dir / (key + ".json"), entry.dump());
    }
  }

  session.messages.push_back({"user", message});
  session.messages.push_back({"assistant", reply});
  session.turn_intents.push_back(intent);
  return reply;
}

std::optional<std::filesystem::path> Gateway::close_session(ChatTranscript& session) {
  session.finished_at = iso8601_now();
  session.validate();
  if (options_.transcript_dir.empty()) return std::nullopt;
  auto path = options_.transcript_dir / (session.content_hash() + ".json");
  write_file_atomic(path, session.to_json().dump(2) + "\n");
  return path;
}

}  // namespace trex
