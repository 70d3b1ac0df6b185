#include "doctest.h"

#include <filesystem>

#include "helpers.hpp"
#include "trex/errors.hpp"
#include "trex/gateway.hpp"
#include "trex/oracles.hpp"
#include "trex/util.hpp"

using namespace trex;
namespace fs = std::filesystem;

namespace {

QueryIntent multiclass(const char* doc, const char* a, const char* b) {
  QueryIntent intent;
  intent.kind = QueryKind::relation_multiclass;
  intent.doc_id = doc;
  intent.e1 = a;
  intent.e2 = b;
  return intent;
}

QueryIntent yesno(const char* doc, const char* a, const char* b, Rel r) {
  QueryIntent intent;
  intent.kind = QueryKind::relation_yesno;
  intent.doc_id = doc;
  intent.e1 = a;
  intent.e2 = b;
  intent.relation = r;
  return intent;
}

QueryIntent same_event(const char* doc, const char* a, const char* b) {
  QueryIntent intent;
  intent.kind = QueryKind::same_event;
  intent.doc_id = doc;
  intent.e1 = a;
  intent.e2 = b;
  return intent;
}

QueryIntent ranking(const char* doc, const char* anchor, Rel r) {
  QueryIntent intent;
  intent.kind = QueryKind::event_ranking;
  intent.doc_id = doc;
  intent.anchor = anchor;
  intent.relation = r;
  return intent;
}

struct ScriptedProvider : Provider {
  std::vector<std::string> replies;
  std::size_t next = 0;
  std::string id() const override { return "scripted"; }
  std::string model() const override { return "m1"; }
  std::string complete(const ChatTranscript&, const ChatMessage&, const QueryIntent&) override {
    if (next >= replies.size()) return "";
    return replies[next++];
  }
};

}  // namespace

TEST_CASE("cache_key contracts") {
  std::vector<ChatMessage> empty;
  auto k1 = cache_key("p", "m", empty, "hello");
  CHECK(k1 == cache_key("p", "m", empty, "hello"));
  CHECK(k1 != cache_key("p", "m", empty, "hello!"));
  CHECK(k1 != cache_key("p2", "m", empty, "hello"));
  CHECK(k1 != cache_key("p", "m2", empty, "hello"));

  std::vector<ChatMessage> history = {{"user", "a"}, {"assistant", "b"}};
  std::vector<ChatMessage> other = {{"user", "a"}, {"assistant", "c"}};
  CHECK(cache_key("p", "m", history, "hello") != k1);
  CHECK(cache_key("p", "m", history, "hello") != cache_key("p", "m", other, "hello"));
  CHECK(k1.size() == 64);
}

TEST_CASE("transcript validation and hashing") {
  ChatTranscript t;
  t.provider_id = "p";
  t.model_id = "m";
  t.messages = {{"user", "q"}, {"assistant", "a"}};
  t.validate();

  auto h = t.content_hash();
  t.started_at = "2026-01-01T00:00:00Z";
  t.finished_at = "2026-01-01T00:00:09Z";
  CHECK(t.content_hash() == h);  // timestamps never shift the hash
  t.messages.push_back({"user", "q2"});
  CHECK(t.content_hash() != h);

  ChatTranscript bad;
  bad.messages = {{"user", "q"}, {"user", "q2"}};
  CHECK_THROWS_AS(bad.validate(), GatewayError);
  bad.messages = {{"assistant", "a"}};
  CHECK_THROWS_AS(bad.validate(), GatewayError);
  bad.messages = {{"system", "s"}, {"user", "q"}, {"assistant", ""}};
  CHECK_THROWS_AS(bad.validate(), GatewayError);

  ChatTranscript ok;
  ok.messages = {{"system", "s"}, {"user", "q"}, {"assistant", "a"}};
  ok.validate();

  auto round = ChatTranscript::from_json(t.to_json());
  CHECK(round.content_hash() == t.content_hash());
}

TEST_CASE("gold oracle answers") {
  auto corpus = testing::small_tbdense_corpus();
  Gateway gw(gold_oracle(corpus), {});
  auto session = gw.open_session("test", "war01", "", "");

  CHECK(gw.send(session, "q1", multiclass("war01", "e1", "e2")) == "before");
  CHECK(gw.send(session, "q2", multiclass("war01", "e2", "e1")) == "after");
  CHECK(gw.send(session, "q3", multiclass("war01", "e1", "e3")) == "vague");
  CHECK(gw.send(session, "q4", yesno("war01", "e1", "e2", Rel::before)) == "Yes.");
  CHECK(gw.send(session, "q5", yesno("war01", "e1", "e2", Rel::after)) == "No.");
  CHECK(gw.send(session, "q6", yesno("war01", "e3", "e4", Rel::before)) == "Yes.");
  CHECK(gw.send(session, "q7", same_event("war01", "e1", "e2")) == "No.");
  CHECK(gw.send(session, "q8", ranking("war01", "e3", Rel::before)) == "e2");
  CHECK(gw.send(session, "q9", ranking("war01", "e3", Rel::after)) == "e4");
  CHECK(gw.send(session, "q10", ranking("war01", "e3", Rel::simultaneous)) == "None.");
  CHECK(gw.provider_calls() == 10);

  auto coref = testing::coref_matres_corpus();
  Gateway gw2(gold_oracle(coref), {});
  auto s2 = gw2.open_session("test", "season01", "e1", "e2");
  CHECK(gw2.send(s2, "q", same_event("season01", "e1", "e2")) == "Yes.");
  CHECK(gw2.send(s2, "q2", same_event("season01", "e2", "e1")) == "Yes.");
  CHECK(gw2.send(s2, "q3", same_event("season01", "e1", "e3")) == "No.");
}

TEST_CASE("gold oracle include family ranking") {
  auto corpus = std::make_shared<Corpus>(*testing::small_tbdense_corpus());
  corpus->pairs.push_back({"war01", "e2", "e1", Rel::is_included});
  // replace the (e1,e2,before) pair to avoid contradictions
  corpus->pairs.erase(corpus->pairs.begin());
  corpus->validate();
  Gateway gw(gold_oracle(corpus), {});
  auto session = gw.open_session("t", "war01", "", "");
  // e2 is included in e1, so the include question anchored at e1 lists e2
  CHECK(gw.send(session, "q1", ranking("war01", "e1", Rel::include)) == "e2");
  // and the is_included question anchored at e2 lists e1
  CHECK(gw.send(session, "q2", ranking("war01", "e2", Rel::is_included)) == "e1");
  CHECK(gw.send(session, "q3", ranking("war01", "e1", Rel::is_included)) == "None.");
}

TEST_CASE("cache round trip issues zero provider calls") {
  auto corpus = testing::small_tbdense_corpus();
  auto dir = fs::temp_directory_path() / "trex_cache_test";
  fs::remove_all(dir);

  GatewayOptions opts;
  opts.cache_dir = dir;
  {
    Gateway gw(gold_oracle(corpus), opts);
    auto session = gw.open_session("t", "war01", "e1", "e2");
    CHECK(gw.send(session, "what relation?", multiclass("war01", "e1", "e2")) == "before");
    CHECK(gw.provider_calls() == 1);
  }
  {
    Gateway gw(gold_oracle(corpus), opts);
    auto session = gw.open_session("t", "war01", "e1", "e2");
    CHECK(gw.send(session, "what relation?", multiclass("war01", "e1", "e2")) == "before");
    CHECK(gw.provider_calls() == 0);
    CHECK(gw.cache_hits() == 1);
  }
  // replay provider rides the same cache without ever being called
  {
    Gateway gw(replay_provider("oracle:gold", "sim"), opts);
    auto session = gw.open_session("t", "war01", "e1", "e2");
    CHECK(gw.send(session, "what relation?", multiclass("war01", "e1", "e2")) == "before");
    CHECK(gw.provider_calls() == 0);
    CHECK_THROWS_AS(gw.send(session, "unseen question", multiclass("war01", "e1", "e2")),
                    GatewayError);
  }
  fs::remove_all(dir);
}

TEST_CASE("transcript persistence") {
  auto corpus = testing::small_tbdense_corpus();
  auto dir = fs::temp_directory_path() / "trex_transcript_test";
  fs::remove_all(dir);
  GatewayOptions opts;
  opts.transcript_dir = dir;
  Gateway gw(gold_oracle(corpus), opts);
  auto session = gw.open_session("zero_shot", "war01", "e1", "e2");
  gw.send(session, "what relation?", multiclass("war01", "e1", "e2"));
  auto path = gw.close_session(session);
  REQUIRE(path.has_value());
  CHECK(fs::exists(*path));
  auto stored = ChatTranscript::from_json(nlohmann::json::parse(read_file(*path)));
  CHECK(stored.messages.size() == 2);
  CHECK(stored.messages[1].content == "before");
  CHECK(stored.content_hash() == session.content_hash());
  CHECK(path->filename().string() == session.content_hash() + ".json");
  fs::remove_all(dir);
}

TEST_CASE("gateway errors") {
  auto provider = std::make_shared<ScriptedProvider>();
  Gateway gw(provider, {});
  auto session = gw.open_session("t", "d", "", "");
  CHECK_THROWS_AS(gw.send(session, "", multiclass("d", "a", "b")), GatewayError);
  // scripted provider is out of replies -> empty reply
  CHECK_THROWS_AS(gw.send(session, "q", multiclass("d", "a", "b")), EmptyReplyError);

  QueryIntent bad;
  bad.kind = QueryKind::relation_yesno;
  bad.doc_id = "d";
  CHECK_THROWS_AS(gw.send(session, "q", bad), GatewayError);
}

TEST_CASE("noisy oracle with identity confusion matches gold") {
  auto corpus = testing::small_tbdense_corpus();
  Confusion identity;
  for (Rel r : corpus->schema.output_space()) identity[r] = {{r, 1.0}};
  auto gold = gold_oracle(corpus);
  auto noisy = noisy_oracle(corpus, identity, 7);
  Gateway gw_gold(gold, {}), gw_noisy(noisy, {});

  std::vector<QueryIntent> probes = {
      multiclass("war01", "e1", "e2"), multiclass("war01", "e2", "e1"),
      multiclass("war01", "e1", "e3"), yesno("war01", "e2", "e3", Rel::before),
      yesno("war01", "e4", "e3", Rel::after), same_event("war01", "e1", "e4"),
      ranking("war01", "e3", Rel::before), ranking("war01", "e1", Rel::simultaneous),
  };
  for (const auto& intent : probes) {
    auto s1 = gw_gold.open_session("t", "war01", "", "");
    auto s2 = gw_noisy.open_session("t", "war01", "", "");
    CHECK(gw_gold.send(s1, "q", intent) == gw_noisy.send(s2, "q", intent));
  }
}

TEST_CASE("noisy oracle swaps labels consistently") {
  auto corpus = testing::small_tbdense_corpus();
  Confusion swap;
  swap[Rel::before] = {{Rel::after, 1.0}};
  swap[Rel::after] = {{Rel::before, 1.0}};
  auto noisy = noisy_oracle(corpus, swap, 7);
  Gateway gw(noisy, {});
  auto session = gw.open_session("t", "war01", "", "");
  CHECK(gw.send(session, "q1", multiclass("war01", "e1", "e2")) == "after");
  // same unordered pair seen from the other side stays coherent
  CHECK(gw.send(session, "q2", multiclass("war01", "e2", "e1")) == "before");
  // vague pair has no swap row: unchanged
  CHECK(gw.send(session, "q3", multiclass("war01", "e1", "e3")) == "vague");
}

TEST_CASE("noisy oracle validates confusion rows") {
  auto corpus = testing::small_tbdense_corpus();
  Confusion bad;
  bad[Rel::before] = {{Rel::after, 0.5}};
  CHECK_THROWS_AS(noisy_oracle(corpus, bad, 1), OracleError);
  bad[Rel::before] = {{Rel::after, -0.5}, {Rel::before, 1.5}};
  CHECK_THROWS_AS(noisy_oracle(corpus, bad, 1), OracleError);
  Confusion off_space;
  off_space[Rel::before] = {{Rel::equal, 1.0}};  // equal is not a tbdense label
  CHECK_THROWS_AS(noisy_oracle(corpus, off_space, 1), OracleError);
}

TEST_CASE("refusal oracle") {
  Gateway gw(refusal_oracle(), {});
  auto session = gw.open_session("t", "d", "", "");
  CHECK(gw.send(session, "q", yesno("d", "a", "b", Rel::before)) == "Unknown.");
  auto reply = gw.send(session, "q2", multiclass("d", "a", "b"));
  bool known = reply == "Cannot determine." ||
               reply == "I cannot answer that question as it is unclear from the given information." ||
               reply == "Unknown.";
  CHECK(known);
  CHECK(gw.send(session, "q3", ranking("d", "a", Rel::before)) == "Cannot determine.");
}

TEST_CASE("oracle answers ignore query order and session") {
  auto corpus = testing::small_tbdense_corpus();
  auto o1 = noisy_oracle(corpus, {{Rel::before, {{Rel::before, 0.5}, {Rel::vague, 0.5}}}}, 99);
  auto o2 = noisy_oracle(corpus, {{Rel::before, {{Rel::before, 0.5}, {Rel::vague, 0.5}}}}, 99);
  Gateway a(o1, {}), b(o2, {});

  std::vector<QueryIntent> probes = {
      multiclass("war01", "e1", "e2"),
      multiclass("war01", "e2", "e3"),
      ranking("war01", "e2", Rel::before),
  };
  std::map<std::string, std::string> first;
  for (const auto& intent : probes) {
    auto s = a.open_session("t", "war01", "", "");
    first[intent.to_json().dump()] = a.send(s, "q", intent);
  }
  for (auto it = probes.rbegin(); it != probes.rend(); ++it) {
    auto s = b.open_session("t", "war01", "", "");
    CHECK(b.send(s, "q", *it) == first[it->to_json().dump()]);
  }
}

TEST_CASE("inconsistent oracle clean mode matches gold rankings") {
  auto corpus = testing::small_tbdense_corpus();
  Gateway gold(gold_oracle(corpus), {});
  Gateway inc(inconsistent_oracle(corpus, 0.0, 5), {});
  for (const char* anchor : {"e1", "e2", "e3", "e4"}) {
    for (Rel r : corpus->schema.queryable) {
      auto s1 = gold.open_session("t", "war01", "", "");
      auto s2 = inc.open_session("t", "war01", "", "");
      auto intent = ranking("war01", anchor, r);
      CHECK(gold.send(s1, "q", intent) == inc.send(s2, "q", intent));
    }
  }
}

TEST_CASE("inconsistent oracle refuses first then may commit") {
  auto corpus = testing::small_tbdense_corpus();
  Gateway gw(inconsistent_oracle(corpus, 0.0, 5, 1.0, 0.75), {});
  auto session = gw.open_session("t", "war01", "e1", "e2");
  CHECK(gw.send(session, "before?", yesno("war01", "e1", "e2", Rel::before)) == "Unknown.");
  // commit_rate 1.0 forces a commit on the follow-up
  auto followup = gw.send(session, "after?", yesno("war01", "e1", "e2", Rel::after));
  CHECK(followup == "Yes.");

  // a fresh session starts over
  auto fresh = gw.open_session("t", "war01", "e2", "e3");
  CHECK(gw.send(fresh, "before?", yesno("war01", "e2", "e3", Rel::before)) == "Unknown.");

  CHECK_THROWS_AS(inconsistent_oracle(corpus, 1.5, 5), OracleError);
  CHECK_THROWS_AS(inconsistent_oracle(corpus, 0.5, 5, 2.0), OracleError);
}
