// HTTP backends for the LLM and embedding clients. Kept in one translation
// unit because cpp-httplib is expensive to compile.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <cstdlib>

#include "cicle/embedding.hpp"
#include "cicle/error.hpp"
#include "cicle/llm_client.hpp"

namespace cicle {
namespace {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Url split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw UsageError("endpoint must be an http(s) URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

std::unique_ptr<httplib::Client> make_client(const Url& url, std::chrono::milliseconds timeout) {
  auto client = std::make_unique<httplib::Client>(url.origin);
  if (!client->is_valid()) throw UsageError("unsupported endpoint: " + url.origin);
  const auto secs = timeout.count() / 1000;
  const auto usecs = (timeout.count() % 1000) * 1000;
  client->set_connection_timeout(secs, usecs);
  client->set_read_timeout(secs, usecs);
  client->set_write_timeout(secs, usecs);
  return client;
}

class HttpChatBackend final : public llm::Backend {
 public:
  explicit HttpChatBackend(const llm::LlmConfig& config) : url_(split_url(config.endpoint)) {
    make_client(url_, config.timeout);  // validates the endpoint up front
    if (const char* key = std::getenv(config.api_key_env.c_str()); key && *key) api_key_ = key;
  }

  // A fresh connection per attempt lets requests run concurrently.
  llm::BackendReply send(const llm::CompletionRequest& request, const llm::LlmConfig& config) override {
    auto client = make_client(url_, config.timeout);
    if (!api_key_.empty()) client->set_bearer_token_auth(api_key_);
    const auto body = llm::chat_request_body(config, request.prompt).dump();
    auto res = client->Post(url_.path, body, "application/json");
    if (!res) {
      throw TransportError("POST " + url_.origin + url_.path + ": " + httplib::to_string(res.error()),
                           request.item_id, 1, true);
    }
    if (res->status != 200) return {res->status, res->body};
    return {200, llm::parse_chat_response(res->body)};
  }

  std::string name() const override { return url_.origin + url_.path; }

 private:
  Url url_;
  std::string api_key_;
};

class HttpEmbeddingTransport final : public vectorize::EmbeddingTransport {
 public:
  explicit HttpEmbeddingTransport(const vectorize::EmbeddingConfig& config)
      : url_(split_url(config.endpoint)), client_(make_client(url_, config.timeout)) {}

  nlohmann::json post(const nlohmann::json& request) override {
    std::lock_guard lock(mutex_);
    auto res = client_->Post(url_.path, request.dump(), "application/json");
    if (!res) {
      throw TransportError("POST " + url_.origin + url_.path + ": " + httplib::to_string(res.error()), {}, 1, true);
    }
    if (res->status != 200) {
      throw TransportError("embedding service returned HTTP " + std::to_string(res->status), {}, 1,
                           res->status >= 500);
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(std::string("embedding service returned malformed JSON: ") + e.what());
    }
  }

 private:
  Url url_;
  std::unique_ptr<httplib::Client> client_;
  std::mutex mutex_;
};

}  // namespace

std::unique_ptr<llm::Backend> llm::make_http_backend(const LlmConfig& config) {
  return std::make_unique<HttpChatBackend>(config);
}

std::unique_ptr<vectorize::EmbeddingTransport> vectorize::make_http_embedding_transport(const EmbeddingConfig& config) {
  return std::make_unique<HttpEmbeddingTransport>(config);
}

}  // namespace cicle
