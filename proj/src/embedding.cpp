#include "cicle/embedding.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <thread>
#include <unordered_set>

#include "cicle/error.hpp"
#include "cicle/hashing.hpp"

namespace cicle::vectorize {

EmbeddingClient::EmbeddingClient(EmbeddingConfig config, std::unique_ptr<EmbeddingTransport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  if (!transport_) throw UsageError("embedding client needs a transport");
  if (config_.max_batch == 0) throw UsageError("embedding max_batch must be positive");
  if (config_.service_id.empty()) config_.service_id = config_.endpoint;
  if (!config_.cache_dir.empty()) std::filesystem::create_directories(config_.cache_dir);
}

std::optional<std::size_t> EmbeddingClient::dimension() const {
  std::lock_guard lock(mutex_);
  return dim_;
}

std::string EmbeddingClient::cache_key(const std::string& text) const {
  return sha256_hex(config_.service_id + '\0' + text);
}

void EmbeddingClient::check_dimension(std::size_t dim) {
  // Caller holds mutex_.
  if (dim == 0) throw DataError("embedding service returned zero-dimensional vectors");
  if (dim_ && *dim_ != dim) {
    throw DataError("embedding dimension drift: " + std::to_string(*dim_) + " -> " + std::to_string(dim));
  }
  dim_ = dim;
}

std::optional<DenseVector> EmbeddingClient::lookup(const std::string& key) {
  std::lock_guard lock(mutex_);
  if (auto it = memory_.find(key); it != memory_.end()) return it->second;
  if (config_.cache_dir.empty()) return std::nullopt;
  const auto path = config_.cache_dir / (key + ".json");
  std::ifstream in(path);
  if (!in) return std::nullopt;
  DenseVector v;
  try {
    v.values = nlohmann::json::parse(in).at("vector").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    spdlog::warn("ignoring corrupt embedding cache entry {}: {}", path.string(), e.what());
    return std::nullopt;
  }
  check_dimension(v.dimension());
  memory_.emplace(key, v);
  return v;
}

void EmbeddingClient::store(const std::string& key, const DenseVector& vector) {
  std::lock_guard lock(mutex_);
  memory_.insert_or_assign(key, vector);
  if (config_.cache_dir.empty()) return;
  const auto path = config_.cache_dir / (key + ".json");
  const auto tmp = config_.cache_dir / (key + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << nlohmann::json{{"dim", vector.dimension()}, {"vector", vector.values}}.dump();
  }
  std::filesystem::rename(tmp, path);
}

std::vector<DenseVector> EmbeddingClient::fetch(std::span<const std::string> texts) {
  const nlohmann::json request = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
  nlohmann::json response;
  for (int attempt = 1;; ++attempt) {
    try {
      ++remote_calls_;
      response = transport_->post(request);
      break;
    } catch (const TransportError& e) {
      if (!e.retriable() || attempt > config_.max_retries) {
        throw TransportError("embedding request failed after " + std::to_string(attempt) +
                                 " attempt(s): " + e.what(),
                             {}, attempt, e.retriable());
      }
      spdlog::warn("embedding attempt {} failed: {}; retrying", attempt, e.what());
      std::this_thread::sleep_for(config_.backoff * (1 << (attempt - 1)));
    }
  }

  if (!response.is_object() || !response.contains("vectors") || !response["vectors"].is_array()) {
    throw DataError("embedding response lacks a vectors array");
  }
  const auto& rows = response["vectors"];
  if (rows.size() != texts.size()) {
    throw DataError("embedding service returned " + std::to_string(rows.size()) + " vectors for " +
                    std::to_string(texts.size()) + " texts");
  }
  std::vector<DenseVector> out;
  out.reserve(rows.size());
  std::lock_guard lock(mutex_);
  std::size_t declared = 0;
  try {
    declared = response.value("dim", rows.empty() ? std::size_t{0} : rows[0].size());
  } catch (const nlohmann::json::exception&) {
    throw DataError("embedding response has a malformed dim");
  }
  for (const auto& row : rows) {
    if (!row.is_array() || !std::all_of(row.begin(), row.end(), [](const auto& x) { return x.is_number(); })) {
      throw DataError("embedding vectors must be arrays of numbers");
    }
    DenseVector v{row.get<std::vector<double>>()};
    if (v.dimension() != declared) throw DataError("embedding vector length differs from declared dim");
    for (double x : v.values) {
      if (!std::isfinite(x)) throw DataError("embedding service returned a non-finite value");
    }
    check_dimension(v.dimension());
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<DenseVector> EmbeddingClient::embed(std::span<const std::string> texts) {
  std::vector<DenseVector> out(texts.size());
  std::vector<std::string> keys(texts.size());
  std::vector<std::size_t> missing;
  std::unordered_set<std::string> pending;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys[i] = cache_key(texts[i]);
    if (auto hit = lookup(keys[i])) {
      out[i] = std::move(*hit);
    } else if (pending.insert(keys[i]).second) {
      missing.push_back(i);
    }
  }

  for (std::size_t start = 0; start < missing.size(); start += config_.max_batch) {
    const std::size_t end = std::min(missing.size(), start + config_.max_batch);
    std::vector<std::string> batch;
    for (std::size_t m = start; m < end; ++m) batch.push_back(texts[missing[m]]);
    auto vectors = fetch(batch);
    for (std::size_t m = start; m < end; ++m) store(keys[missing[m]], vectors[m - start]);
  }

  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (out[i].values.empty()) {
      std::lock_guard lock(mutex_);
      out[i] = memory_.at(keys[i]);
    }
  }
  return out;
}

DenseVector EmbeddingClient::embed_one(const std::string& text) {
  return embed(std::span<const std::string>(&text, 1)).front();
}

namespace {

class HashingTransport final : public EmbeddingTransport {
 public:
  explicit HashingTransport(std::size_t dim) : dim_(dim) {}

  nlohmann::json post(const nlohmann::json& request) override {
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& text : request.at("texts")) {
      std::vector<double> v(dim_, 0.0);
      for (const auto& token : tokenize(text.get<std::string>())) {
        const auto h = fnv1a64(token);
        v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      if (norm > 0.0) {
        norm = std::sqrt(norm);
        for (double& x : v) x /= norm;
      }
      vectors.push_back(std::move(v));
    }
    return {{"vectors", std::move(vectors)}, {"dim", dim_}};
  }

 private:
  std::size_t dim_;
};

}  // namespace

std::unique_ptr<EmbeddingTransport> make_hashing_embedding_transport(std::size_t dim) {
  if (dim == 0) throw UsageError("hashing embedding dimension must be positive");
  return std::make_unique<HashingTransport>(dim);
}

bool is_hashing_embedding_spec(std::string_view spec) { return spec.rfind("hashing:", 0) == 0; }

std::size_t parse_hashing_embedding_spec(std::string_view spec) {
  if (!is_hashing_embedding_spec(spec)) throw UsageError("not a hashing embedding spec: " + std::string(spec));
  const auto digits = spec.substr(8);
  std::size_t dim = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
  if (ec != std::errc{} || ptr != digits.data() + digits.size() || dim == 0) {
    throw UsageError("bad hashing embedding spec: " + std::string(spec));
  }
  return dim;
}

}  // namespace cicle::vectorize
