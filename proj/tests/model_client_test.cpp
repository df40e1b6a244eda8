#include <gtest/gtest.h>
#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <json.hpp>
#include <thread>

#include "vetl/model_client.hpp"
#include "vetl/util.hpp"

using namespace vetl;
using namespace vetl::model;
namespace fs = std::filesystem;

namespace {

prompt::PromptBundle bundle(std::string text, bool with_image = false) {
  prompt::PromptBundle b;
  b.text = std::move(text);
  if (with_image) b.image = Image(8, 8, colors::kBlue);
  return b;
}

fs::path temp_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("vetl_model_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Minimal chat-completions server; fails the first `failures` requests with 503.
struct FakeChatServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> requests{0};
  std::atomic<int> failures{0};
  std::string last_body;
  std::string last_auth;

  FakeChatServer() {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++requests;
      if (failures > 0) {
        --failures;
        res.status = 503;
        return;
      }
      last_body = req.body;
      last_auth = req.get_header_value("Authorization");
      nlohmann::json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", "Generated Input Text: 199"}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~FakeChatServer() {
    server.stop();
    thread.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"; }
};

}  // namespace

TEST(ScriptedBackend, PrimedAnswerIsReturned) {
  ScriptedBackend b({{"", std::nullopt, "Selected Button Number: 2", false}}, "");
  EXPECT_EQ(b.complete(bundle("anything")), "Selected Button Number: 2");
  EXPECT_EQ(b.complete(bundle("anything")), "");
}

TEST(ScriptedBackend, FirstMatchConsumesInOrder) {
  ScriptedBackend b({{"amount", std::nullopt, "A1", false},
                     {"amount", std::nullopt, "A2", false},
                     {"", std::string("filled with: \\d+"), "B", true}},
                    "default");
  EXPECT_EQ(b.complete(bundle("about amount")), "A1");
  EXPECT_EQ(b.complete(bundle("about amount")), "A2");
  EXPECT_EQ(b.complete(bundle("about amount")), "default");
  EXPECT_EQ(b.complete(bundle("filled with: 199")), "B");
  EXPECT_EQ(b.complete(bundle("filled with: 7")), "B");
  EXPECT_EQ(b.remaining(), 1u);
}

TEST(ScriptedBackend, FromJson) {
  auto b = ScriptedBackend::from_json(
      R"({"supports_vision": false, "default": "d", "entries": [{"contains": "x", "response": "r"}]})");
  EXPECT_FALSE(b->supports_vision());
  EXPECT_EQ(b->complete(bundle("x")), "r");
  EXPECT_EQ(b->complete(bundle("x")), "d");
  EXPECT_THROW(ScriptedBackend::from_json("{"), ModelError);
  EXPECT_THROW(ScriptedBackend::from_json(R"({"entries": []})"), ModelError);
  EXPECT_THROW(ScriptedBackend::from_json(R"({"entries": [{"pattern": "(", "response": "r"}]})"), ModelError);
}

TEST(ModelClient, VisionGate) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptedBackend::Entry>{}, "ok", false);
  ModelClient client(backend);
  try {
    client.query(bundle("p", true), 0);
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.code(), Errc::vision_unsupported);
  }
  EXPECT_EQ(client.query(bundle("p"), 0), "ok");
}

TEST(ModelClient, LogCountsEveryQuery) {
  auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptedBackend::Entry>{}, "ok");
  ExchangeLog log;
  ModelClient client(backend, &log);
  int seq = -1;
  for (int i = 0; i < 7; ++i) client.query(bundle("p" + std::to_string(i), i % 2 == 0), i, &seq);
  EXPECT_EQ(log.size(), 7u);
  EXPECT_EQ(seq, 6);
  auto ex = log.exchanges();
  EXPECT_EQ(ex[3].prompt_text, "p3");
  EXPECT_EQ(ex[3].step_index, 3);
  EXPECT_TRUE(ex[3].image_digest.empty());
  EXPECT_EQ(ex[4].image_digest.size(), 64u);
}

TEST(ModelClient, LogMirrorsToFile) {
  auto dir = temp_dir("log");
  auto backend = std::make_shared<ScriptedBackend>(std::vector<ScriptedBackend::Entry>{}, "ok");
  ExchangeLog log((dir / "exchanges.jsonl").string());
  ModelClient client(backend, &log);
  client.query(bundle("a"), 0);
  client.query(bundle("b"), 1);
  auto lines = split(trim(read_file((dir / "exchanges.jsonl").string())), '\n');
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(nlohmann::json::parse(lines[1])["prompt"], "b");
}

TEST(RecordReplay, ReplayReproducesRecordedAnswers) {
  auto dir = temp_dir("replay");
  std::string store = (dir / "store.jsonl").string();
  auto live = std::make_shared<ScriptedBackend>(
      std::vector<ScriptedBackend::Entry>{{"q", std::nullopt, "first", false}, {"q", std::nullopt, "second", false}},
      "other");
  RecordingBackend rec(live, store);
  EXPECT_EQ(rec.complete(bundle("q", true)), "first");
  EXPECT_EQ(rec.complete(bundle("q", true)), "second");
  EXPECT_EQ(rec.complete(bundle("z")), "other");
  EXPECT_EQ(std::distance(fs::directory_iterator(store + ".images"), fs::directory_iterator{}), 1);

  ReplayBackend replay(store);
  EXPECT_EQ(replay.complete(bundle("q", true)), "first");
  EXPECT_EQ(replay.complete(bundle("q", true)), "second");
  EXPECT_EQ(replay.complete(bundle("q", true)), "second");
  EXPECT_EQ(replay.complete(bundle("z")), "other");
  try {
    replay.complete(bundle("q"));  // same text, no image: different key
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.code(), Errc::replay_miss);
  }
}

TEST(RecordReplay, KeyDependsOnTextAndImage) {
  auto a = bundle("t", true), b = bundle("t", true), c = bundle("t");
  EXPECT_EQ(replay_key(a), replay_key(b));
  EXPECT_NE(replay_key(a), replay_key(c));
  b.image->set(0, 0, colors::kRed);
  EXPECT_NE(replay_key(a), replay_key(b));
}

TEST(HttpChatBackend, RequestShape) {
  BackendConfig cfg;
  cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  cfg.model_name = "m";
  HttpChatBackend b(cfg);
  auto j = nlohmann::json::parse(b.request_body(bundle("hello", true)));
  EXPECT_EQ(j["model"], "m");
  EXPECT_DOUBLE_EQ(j["temperature"].get<double>(), 0.2);
  ASSERT_EQ(j["messages"].size(), 1u);
  EXPECT_EQ(j["messages"][0]["role"], "user");
  EXPECT_EQ(j["messages"][0]["content"][0]["text"], "hello");
  std::string url = j["messages"][0]["content"][1]["image_url"]["url"];
  EXPECT_EQ(url.rfind("data:image/png;base64,", 0), 0u);
  auto png = base64_decode(url.substr(std::string("data:image/png;base64,").size()));
  EXPECT_EQ(decode_png(png), Image(8, 8, colors::kBlue));
  j = nlohmann::json::parse(b.request_body(bundle("plain")));
  EXPECT_EQ(j["messages"][0]["content"], "plain");
}

TEST(HttpChatBackend, QueriesAndRetries) {
  FakeChatServer fake;
  BackendConfig cfg;
  cfg.endpoint = fake.endpoint();
  cfg.api_key = "sekret";
  cfg.backoff = std::chrono::milliseconds(1);
  cfg.max_retries = 2;
  HttpChatBackend b(cfg);
  fake.failures = 2;
  EXPECT_EQ(b.complete(bundle("x", true)), "Generated Input Text: 199");
  EXPECT_EQ(fake.requests.load(), 3);
  EXPECT_EQ(fake.last_auth, "Bearer sekret");

  fake.failures = 5;
  try {
    b.complete(bundle("x"));
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_EQ(e.code(), Errc::backend_unavailable);
  }
}

TEST(HttpChatBackend, UnreachableIsUnavailable) {
  BackendConfig cfg;
  cfg.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  cfg.max_retries = 1;
  cfg.timeout_s = 1;
  cfg.backoff = std::chrono::milliseconds(1);
  HttpChatBackend b(cfg);
  try {
    b.complete(bundle("x"));
    FAIL();
  } catch (const ModelError& e) {
    EXPECT_TRUE(e.code() == Errc::backend_unavailable || e.code() == Errc::timeout);
  }
}
