#pragma once

#include <cstddef>
#include <cstdint>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cicle::vectorize {

// Lowercased maximal runs of >= 2 word characters. Word characters are ASCII
// letters, digits, '_' and any non-ASCII byte (UTF-8 sequences stay whole).
std::vector<std::string> tokenize(std::string_view text);

struct SparseEntry {
  std::uint32_t index;
  double value;

  bool operator==(const SparseEntry&) const = default;
};

// Sparse row with strictly increasing column indices.
class SparseVector {
 public:
  SparseVector() = default;
  // Throws DataError unless indices are strictly increasing and < dimension.
  SparseVector(std::vector<SparseEntry> entries, std::size_t dimension);

  const std::vector<SparseEntry>& entries() const noexcept { return entries_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  bool is_zero() const noexcept { return entries_.empty(); }
  double norm() const;
  double dot(const SparseVector& other) const;

  bool operator==(const SparseVector&) const = default;

 private:
  std::vector<SparseEntry> entries_;
  std::size_t dimension_ = 0;
};

struct DenseVector {
  std::vector<double> values;

  std::size_t dimension() const noexcept { return values.size(); }
  bool operator==(const DenseVector&) const = default;
};

// Fitted vocabulary with smoothed idf: idf(t) = ln((1 + N) / (1 + df(t))) + 1.
// transform() weights raw term counts by idf and l2-normalizes the row.
class TfidfModel {
 public:
  static constexpr std::string_view kTokenPattern = "lowercase, maximal runs of >= 2 word characters";

  // Throws DataError for an empty corpus or when no token survives.
  static TfidfModel fit(std::span<const std::string> corpus);

  SparseVector transform(std::string_view text) const;
  std::vector<SparseVector> transform_all(std::span<const std::string> texts) const;

  std::size_t dimension() const noexcept { return terms_.size(); }
  std::size_t document_count() const noexcept { return documents_; }
  std::optional<std::uint32_t> column(std::string_view token) const;
  const std::string& term(std::uint32_t column) const { return terms_.at(column); }
  double idf(std::uint32_t column) const { return idf_.at(column); }
  // Content hash over terms and idf weights; keys serialized classifiers.
  const std::string& vocabulary_hash() const noexcept { return hash_; }

  nlohmann::json to_json() const;
  static TfidfModel from_json(const nlohmann::json& j);

 private:
  void index_terms();

  std::vector<std::string> terms_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::uint32_t> vocabulary_;
  std::size_t documents_ = 0;
  std::string hash_;
};

// a.b / (|a||b|), 0 when either norm is 0. Throws DataError on dimension mismatch.
double cosine(const SparseVector& a, const SparseVector& b);
double cosine(const DenseVector& a, const DenseVector& b);

}  // namespace cicle::vectorize
