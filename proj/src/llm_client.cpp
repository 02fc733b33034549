#include "cicle/llm_client.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <thread>

#include "cicle/error.hpp"
#include "cicle/hashing.hpp"

namespace cicle::llm {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\f\v");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(first, last - first + 1);
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](unsigned char x, unsigned char y) {
           return std::tolower(x) == std::tolower(y);
         });
}

bool has_candidate(const CompletionRequest& r, const std::string& label) {
  return std::find(r.candidates.begin(), r.candidates.end(), label) != r.candidates.end();
}

std::string first_candidate(const CompletionRequest& r) { return r.candidates.empty() ? "" : r.candidates.front(); }

class PerfectOracle final : public Backend {
 public:
  BackendReply send(const CompletionRequest& r, const LlmConfig&) override {
    return {200, has_candidate(r, r.gold) ? r.gold : first_candidate(r)};
  }
  std::string name() const override { return "oracle:perfect"; }
};

class MajorityOracle final : public Backend {
 public:
  BackendReply send(const CompletionRequest& r, const LlmConfig&) override { return {200, first_candidate(r)}; }
  std::string name() const override { return "oracle:majority"; }
};

class CopyLastShotOracle final : public Backend {
 public:
  BackendReply send(const CompletionRequest& r, const LlmConfig&) override {
    return {200, r.shot_labels.empty() ? std::string() : r.shot_labels.back()};
  }
  std::string name() const override { return "oracle:copy-last-shot"; }
};

class NoisyOracle final : public Backend {
 public:
  NoisyOracle(std::map<std::string, double> per_class, double fallback, std::uint64_t seed)
      : per_class_(std::move(per_class)), fallback_(fallback), seed_(seed) {
    auto check = [](double a) {
      if (!(a >= 0.0 && a <= 1.0)) throw UsageError("noisy oracle accuracy must lie in [0, 1]");
    };
    check(fallback_);
    for (const auto& [label, acc] : per_class_) check(acc);
  }

  BackendReply send(const CompletionRequest& r, const LlmConfig&) override {
    const auto it = per_class_.find(r.gold);
    const double accuracy = it == per_class_.end() ? fallback_ : it->second;
    const std::uint64_t h = mix_seed(seed_, fnv1a64(r.prompt, fnv1a64(r.item_id)));
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
    if (has_candidate(r, r.gold) && u < accuracy) return {200, r.gold};
    for (const auto& c : r.candidates) {
      if (c != r.gold) return {200, c};
    }
    return {200, first_candidate(r)};
  }
  std::string name() const override { return "oracle:noisy"; }

 private:
  std::map<std::string, double> per_class_;
  double fallback_;
  std::uint64_t seed_;
};

}  // namespace

void LlmConfig::validate() const {
  if (!deterministic) throw UsageError("LLM decoding must be deterministic");
  if (max_new_tokens < 1) throw UsageError("max_new_tokens must be at least 1");
  if (max_retries < 0) throw UsageError("max_retries must be non-negative");
  if (concurrency_limit == 0) throw UsageError("concurrency_limit must be positive");
  if (requests_per_second < 0.0) throw UsageError("requests_per_second must be non-negative");
}

nlohmann::json chat_request_body(const LlmConfig& config, std::string_view prompt) {
  return {{"model", config.model_id},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
          {"temperature", 0},
          {"max_tokens", config.max_new_tokens}};
}

std::string parse_chat_response(std::string_view body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& content = j.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed chat-completions response: ") + e.what());
  }
}

bool is_oracle_spec(std::string_view spec) {
  if (spec.rfind("oracle:", 0) == 0) spec.remove_prefix(7);
  return spec == "perfect" || spec == "majority" || spec == "copy-last-shot" || spec.rfind("noisy:", 0) == 0;
}

std::unique_ptr<Backend> make_oracle(std::string_view spec) {
  if (spec.rfind("oracle:", 0) == 0) spec.remove_prefix(7);
  if (spec == "perfect") return std::make_unique<PerfectOracle>();
  if (spec == "majority") return std::make_unique<MajorityOracle>();
  if (spec == "copy-last-shot") return std::make_unique<CopyLastShotOracle>();
  if (spec.rfind("noisy:", 0) == 0) {
    std::string rest(spec.substr(6));
    std::uint64_t seed = 0;
    double acc = 0.0;
    try {
      if (const auto colon = rest.find(':'); colon != std::string::npos) {
        std::size_t used = 0;
        seed = std::stoull(rest.substr(colon + 1), &used);
        if (used != rest.size() - colon - 1) throw std::invalid_argument("seed");
        rest.resize(colon);
      }
      std::size_t used = 0;
      acc = std::stod(rest, &used);
      if (used != rest.size()) throw std::invalid_argument("accuracy");
    } catch (const std::exception&) {
      throw UsageError("noisy oracle spec must look like noisy:<accuracy>[:<seed>], got " + std::string(spec));
    }
    return std::make_unique<NoisyOracle>(std::map<std::string, double>{}, acc, seed);
  }
  throw UsageError("unknown oracle: " + std::string(spec));
}

std::unique_ptr<Backend> make_noisy_oracle(std::map<std::string, double> per_class_accuracy, double fallback,
                                           std::uint64_t seed) {
  return std::make_unique<NoisyOracle>(std::move(per_class_accuracy), fallback, seed);
}

LlmClient::LlmClient(LlmConfig config, std::unique_ptr<Backend> backend)
    : config_(std::move(config)), backend_(std::move(backend)) {
  config_.validate();
  if (!backend_) throw UsageError("LLM client needs a backend");
}

void LlmClient::acquire() {
  std::unique_lock lock(mutex_);
  slot_free_.wait(lock, [&] { return in_flight_ < config_.concurrency_limit; });
  ++in_flight_;
  std::size_t seen = max_in_flight_.load();
  while (in_flight_ > seen && !max_in_flight_.compare_exchange_weak(seen, in_flight_)) {
  }
}

void LlmClient::release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  slot_free_.notify_one();
}

void LlmClient::throttle() {
  if (config_.requests_per_second <= 0.0) return;
  std::unique_lock lock(bucket_mutex_);
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_refill_).count();
    tokens_ = std::min(1.0, tokens_ + elapsed * config_.requests_per_second);
    last_refill_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / config_.requests_per_second);
    std::this_thread::sleep_for(wait);
  }
}

LlmResponse LlmClient::complete(const CompletionRequest& request) {
  struct Slot {
    LlmClient& c;
    explicit Slot(LlmClient& client) : c(client) { c.acquire(); }
    ~Slot() { c.release(); }
  } slot(*this);

  ++completions_;
  const auto start = std::chrono::steady_clock::now();
  for (int attempt = 1;; ++attempt) {
    throttle();
    ++attempts_;
    std::string failure;
    bool retriable = true;
    try {
      auto reply = backend_->send(request, config_);
      if (reply.status >= 200 && reply.status < 300) {
        return {std::move(reply.content), std::chrono::steady_clock::now() - start, attempt};
      }
      failure = "HTTP " + std::to_string(reply.status);
      retriable = reply.status >= 500;
    } catch (const TransportError& e) {
      failure = e.what();
      retriable = e.retriable();
    }
    if (!retriable || attempt > config_.max_retries) {
      throw TransportError("item " + request.item_id + ": " + failure + " after " + std::to_string(attempt) +
                               " attempt(s)",
                           request.item_id, attempt, false);
    }
    spdlog::debug("item {}: attempt {} failed ({}); retrying", request.item_id, attempt, failure);
    std::this_thread::sleep_for(config_.backoff * (1 << std::min(attempt - 1, 16)));
  }
}

std::optional<std::size_t> parse_label(std::string_view raw, const corpus::LabelSpace& labels) {
  const auto answer = trim(raw);
  if (answer.empty()) return std::nullopt;
  if (auto exact = labels.find(answer)) return exact;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (iequals(answer, labels.name(k))) return k;
  }
  return std::nullopt;
}

}  // namespace cicle::llm
