#include <doctest.h>

#include <atomic>
#include <deque>
#include <mutex>
#include <thread>

#include "cicle/error.hpp"
#include "cicle/llm_client.hpp"

using namespace cicle;
using namespace cicle::llm;

namespace {

CompletionRequest request(std::vector<std::string> candidates, std::string gold,
                          std::vector<std::string> shot_labels = {}) {
  return {"item-1", "prompt text", std::move(candidates), std::move(shot_labels), std::move(gold)};
}

LlmConfig fast_config() {
  LlmConfig c;
  c.endpoint = "test";
  c.backoff = std::chrono::milliseconds(0);
  return c;
}

std::string ask(std::string_view oracle, const CompletionRequest& r) {
  LlmClient client(fast_config(), make_oracle(oracle));
  return client.complete(r).raw;
}

// Replays a fixed list of replies (or throws for status -1).
struct ScriptedBackend : Backend {
  std::deque<int> statuses;
  std::atomic<int> calls{0};

  BackendReply send(const CompletionRequest&, const LlmConfig&) override {
    ++calls;
    int status = 200;
    if (!statuses.empty()) {
      status = statuses.front();
      statuses.pop_front();
    }
    if (status == -1) throw TransportError("timeout", "", 0, true);
    return {status, status == 200 ? "Sports" : "error"};
  }
  std::string name() const override { return "scripted"; }
};

struct SlowBackend : Backend {
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};

  BackendReply send(const CompletionRequest& r, const LlmConfig&) override {
    const int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --in_flight;
    return {200, r.item_id};
  }
  std::string name() const override { return "slow"; }
};

}  // namespace

TEST_CASE("perfect oracle answers gold only when it is a candidate") {
  CHECK(ask("perfect", request({"World", "Sports"}, "Sports")) == "Sports");
  CHECK(ask("perfect", request({"World", "Business"}, "Sports")) == "World");
  CHECK(ask("oracle:perfect", request({"World", "Sports"}, "Sports")) == "Sports");
}

TEST_CASE("majority and copy-last-shot oracles") {
  CHECK(ask("majority", request({"World", "Sports"}, "Sports")) == "World");
  CHECK(ask("copy-last-shot", request({"A", "B"}, "A", {"A", "A", "B", "B"})) == "B");
  CHECK(ask("copy-last-shot", request({"A", "B"}, "A")).empty());
}

TEST_CASE("noisy oracle: extremes, determinism and per-class accuracy") {
  CHECK(ask("noisy:1.0", request({"A", "B"}, "B")) == "B");
  CHECK(ask("noisy:0.0", request({"A", "B"}, "A")) == "B");
  CHECK(ask("noisy:0.5:3", request({"A", "B"}, "A")) == ask("noisy:0.5:3", request({"A", "B"}, "A")));

  LlmClient client(fast_config(), make_noisy_oracle({{"A", 1.0}, {"B", 0.0}}, 0.5, 1));
  CHECK(client.complete(request({"A", "B"}, "A")).raw == "A");
  CHECK(client.complete(request({"A", "B"}, "B")).raw == "A");

  LlmClient half(fast_config(), make_oracle("noisy:0.7:9"));
  int right = 0;
  for (int i = 0; i < 2000; ++i) {
    CompletionRequest r = request({"A", "B", "C"}, "B");
    r.item_id = "i" + std::to_string(i);
    right += half.complete(r).raw == "B";
  }
  CHECK(right > 1300);
  CHECK(right < 1500);
}

TEST_CASE("oracle spec parsing") {
  CHECK(is_oracle_spec("perfect"));
  CHECK(is_oracle_spec("oracle:noisy:0.3"));
  CHECK_FALSE(is_oracle_spec("http://localhost"));
  CHECK_THROWS_AS(make_oracle("psychic"), UsageError);
  CHECK_THROWS_AS(make_oracle("noisy:"), UsageError);
  CHECK_THROWS_AS(make_oracle("noisy:abc"), UsageError);
  CHECK_THROWS_AS(make_oracle("noisy:0.5:x"), UsageError);
  CHECK_THROWS_AS(make_oracle("noisy:1.5"), UsageError);
}

TEST_CASE("500 twice then 200 succeeds on the third attempt") {
  auto backend = std::make_unique<ScriptedBackend>();
  backend->statuses = {500, 500, 200};
  auto* raw = backend.get();
  LlmClient client(fast_config(), std::move(backend));
  const auto response = client.complete(request({"Sports"}, "Sports"));
  CHECK(response.attempts == 3);
  CHECK(response.raw == "Sports");
  CHECK(raw->calls == 3);
  CHECK(client.attempts() == 3);
  CHECK(client.completions() == 1);
}

TEST_CASE("timeouts are retried; exhaustion carries the item id") {
  auto backend = std::make_unique<ScriptedBackend>();
  backend->statuses = {-1, 200};
  LlmClient client(fast_config(), std::move(backend));
  CHECK(client.complete(request({"Sports"}, "Sports")).attempts == 2);

  auto failing = std::make_unique<ScriptedBackend>();
  failing->statuses = {503, 503, 503, 503, 503, 503};
  auto* raw = failing.get();
  auto config = fast_config();
  config.max_retries = 2;
  LlmClient broken(config, std::move(failing));
  try {
    broken.complete(request({"Sports"}, "Sports"));
    FAIL("expected TransportError");
  } catch (const TransportError& e) {
    CHECK(e.item_id() == "item-1");
    CHECK(e.attempts() == 3);
  }
  CHECK(raw->calls == 3);
}

TEST_CASE("4xx replies are not retried") {
  auto backend = std::make_unique<ScriptedBackend>();
  backend->statuses = {400, 200};
  auto* raw = backend.get();
  LlmClient client(fast_config(), std::move(backend));
  CHECK_THROWS_AS(client.complete(request({"Sports"}, "Sports")), TransportError);
  CHECK(raw->calls == 1);
}

TEST_CASE("concurrency limit bounds requests in flight") {
  auto backend = std::make_unique<SlowBackend>();
  auto* raw = backend.get();
  auto config = fast_config();
  config.concurrency_limit = 3;
  LlmClient client(config, std::move(backend));
  std::vector<std::jthread> threads;
  std::mutex m;
  std::vector<std::pair<std::string, std::string>> results;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 5; ++i) {
        auto r = request({"A"}, "A");
        r.item_id = std::to_string(t) + "-" + std::to_string(i);
        auto response = client.complete(r);
        std::lock_guard lock(m);
        results.emplace_back(r.item_id, response.raw);
      }
    });
  }
  threads.clear();
  CHECK(raw->peak <= 3);
  CHECK(client.max_in_flight() <= 3);
  CHECK(results.size() == 40);
  for (const auto& [id, raw_answer] : results) CHECK(id == raw_answer);
}

TEST_CASE("token bucket spaces requests") {
  auto config = fast_config();
  config.requests_per_second = 50.0;
  LlmClient client(config, make_oracle("majority"));
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 6; ++i) client.complete(request({"A"}, "A"));
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(elapsed >= std::chrono::milliseconds(90));
}

TEST_CASE("config validation") {
  auto c = fast_config();
  c.deterministic = false;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = fast_config();
  c.max_new_tokens = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = fast_config();
  c.concurrency_limit = 0;
  CHECK_THROWS_AS(LlmClient(c, make_oracle("perfect")), UsageError);
}

TEST_CASE("chat request body and response parsing") {
  auto c = fast_config();
  c.model_id = "m";
  const auto body = chat_request_body(c, "hi");
  CHECK(body == nlohmann::json::parse(
                    R"({"model":"m","messages":[{"role":"user","content":"hi"}],"temperature":0,"max_tokens":5})"));
  CHECK(parse_chat_response(R"({"choices":[{"message":{"role":"assistant","content":" Sports\n"}}]})") == " Sports\n");
  CHECK_THROWS_AS(parse_chat_response(R"({"choices":[]})"), DataError);
  CHECK_THROWS_AS(parse_chat_response("not json"), DataError);
}

TEST_CASE("parse_label: trimmed case-insensitive exact match") {
  const corpus::LabelSpace labels({"Business", "Sports", "sports_extra"});
  CHECK(parse_label(" sports\n", labels) == 1);
  CHECK(parse_label("Sports", labels) == 1);
  CHECK(parse_label("SPORTS_EXTRA", labels) == 2);
  CHECK_FALSE(parse_label("I think Sports", labels).has_value());
  CHECK_FALSE(parse_label("", labels).has_value());
  CHECK_FALSE(parse_label("Sports.", labels).has_value());
}

TEST_CASE("parse_label prefers an exact match over a case-folded one") {
  const corpus::LabelSpace labels({"ABC", "abc"});
  CHECK(parse_label("abc", labels) == 1);
  CHECK(parse_label("ABC", labels) == 0);
  CHECK(parse_label("Abc", labels) == 0);
}
