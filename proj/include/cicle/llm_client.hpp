#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <json.hpp>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cicle/corpus.hpp"

namespace cicle::llm {

struct LlmConfig {
  std::string endpoint;  // chat-completions URL, or "oracle:<name>"
  std::string model_id;
  int max_new_tokens = 5;
  bool deterministic = true;
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::size_t concurrency_limit = 4;
  std::chrono::milliseconds backoff{500};  // doubled per retry
  double requests_per_second = 0.0;        // 0 disables the token bucket
  std::string api_key_env = "CICLE_API_KEY";

  void validate() const;
};

// What the client sends. Only `prompt` goes over the wire; the other fields
// let the mock oracles answer without parsing prompt text.
struct CompletionRequest {
  std::string item_id;
  std::string prompt;
  std::vector<std::string> candidates;   // candidate classes in prompt order
  std::vector<std::string> shot_labels;  // label of every shot, prompt order
  std::string gold;                      // known to oracles only
};

struct LlmResponse {
  std::string raw;
  std::chrono::nanoseconds latency{0};
  int attempts = 0;
};

// Outcome of one attempt. Transport failures (connection, timeout) throw
// TransportError instead.
struct BackendReply {
  int status = 200;
  std::string content;  // message content on 200, error body otherwise
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply send(const CompletionRequest& request, const LlmConfig& config) = 0;
  virtual std::string name() const = 0;
};

// Chat-completions request body for `prompt`.
nlohmann::json chat_request_body(const LlmConfig& config, std::string_view prompt);
// First choice's message content; throws DataError on a malformed body.
std::string parse_chat_response(std::string_view body);

std::unique_ptr<Backend> make_http_backend(const LlmConfig& config);

// Deterministic mock oracles:
//   perfect         gold if it is a candidate, else the first candidate
//   majority        the first candidate
//   copy-last-shot  the label of the last shot (empty if no shots)
//   noisy:<acc>[:<seed>]  gold with probability acc (when it is a candidate),
//                   else the first non-gold candidate
std::unique_ptr<Backend> make_oracle(std::string_view spec);

// Noisy oracle with per-class accuracies; classes not listed use `fallback`.
std::unique_ptr<Backend> make_noisy_oracle(std::map<std::string, double> per_class_accuracy, double fallback,
                                           std::uint64_t seed);

bool is_oracle_spec(std::string_view spec);

// Thread-safe dispatcher: bounded concurrency, optional rate limit, retries
// with exponential backoff on transport failures and 5xx replies only.
class LlmClient {
 public:
  LlmClient(LlmConfig config, std::unique_ptr<Backend> backend);

  // Throws TransportError (carrying the item id) once retries are exhausted
  // or on a non-retriable reply.
  LlmResponse complete(const CompletionRequest& request);

  std::size_t completions() const noexcept { return completions_.load(); }
  std::size_t attempts() const noexcept { return attempts_.load(); }
  std::size_t max_in_flight() const noexcept { return max_in_flight_.load(); }
  const LlmConfig& config() const noexcept { return config_; }
  std::string backend_name() const { return backend_->name(); }

 private:
  void acquire();
  void release();
  void throttle();

  LlmConfig config_;
  std::unique_ptr<Backend> backend_;
  std::mutex mutex_;
  std::condition_variable slot_free_;
  std::size_t in_flight_ = 0;
  std::atomic<std::size_t> max_in_flight_{0};
  std::atomic<std::size_t> completions_{0};
  std::atomic<std::size_t> attempts_{0};
  std::mutex bucket_mutex_;
  double tokens_ = 1.0;
  std::chrono::steady_clock::time_point last_refill_ = std::chrono::steady_clock::now();
};

// Trimmed, case-insensitive exact match against the label names; nullopt
// stands for an invalid answer.
std::optional<std::size_t> parse_label(std::string_view raw, const corpus::LabelSpace& labels);

}  // namespace cicle::llm
