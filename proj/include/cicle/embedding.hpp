#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cicle/vectorize.hpp"

namespace cicle::vectorize {

struct EmbeddingConfig {
  std::string endpoint;    // e.g. http://localhost:8081/embed
  std::string service_id;  // cache namespace; defaults to the endpoint
  std::size_t max_batch = 64;
  int max_retries = 3;
  std::chrono::milliseconds timeout{30000};
  std::chrono::milliseconds backoff{200};
  std::filesystem::path cache_dir;  // empty disables the disk cache
};

// One POST of {"texts": [...]} returning {"vectors": [[...]], "dim": d}.
// Implementations throw TransportError(retriable=true) on transport failures
// and 5xx responses.
class EmbeddingTransport {
 public:
  virtual ~EmbeddingTransport() = default;
  virtual nlohmann::json post(const nlohmann::json& request) = 0;
};

std::unique_ptr<EmbeddingTransport> make_http_embedding_transport(const EmbeddingConfig& config);

// Offline stand-in: l2-normalised hashed bag of tokens with `dim` buckets.
std::unique_ptr<EmbeddingTransport> make_hashing_embedding_transport(std::size_t dim);

// "hashing:<dim>" selects the offline transport; anything else is a URL.
bool is_hashing_embedding_spec(std::string_view spec);
std::size_t parse_hashing_embedding_spec(std::string_view spec);

// Batching, retrying, caching client for an external sentence-embedding
// service. The cache is content addressed by (service id, sha256(text)).
class EmbeddingClient {
 public:
  EmbeddingClient(EmbeddingConfig config, std::unique_ptr<EmbeddingTransport> transport);

  // One vector per input, order preserved. Duplicate and cached texts are not
  // re-sent. Throws TransportError after exhausting retries and DataError on a
  // malformed response or dimension drift.
  std::vector<DenseVector> embed(std::span<const std::string> texts);
  DenseVector embed_one(const std::string& text);

  std::size_t remote_calls() const noexcept { return remote_calls_.load(); }
  std::optional<std::size_t> dimension() const;
  const EmbeddingConfig& config() const noexcept { return config_; }

 private:
  std::string cache_key(const std::string& text) const;
  std::optional<DenseVector> lookup(const std::string& key);
  void store(const std::string& key, const DenseVector& vector);
  std::vector<DenseVector> fetch(std::span<const std::string> texts);
  void check_dimension(std::size_t dim);

  EmbeddingConfig config_;
  std::unique_ptr<EmbeddingTransport> transport_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, DenseVector> memory_;
  std::optional<std::size_t> dim_;
  std::atomic<std::size_t> remote_calls_{0};
};

}  // namespace cicle::vectorize
