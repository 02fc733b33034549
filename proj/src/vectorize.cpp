#include "cicle/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "cicle/error.hpp"
#include "cicle/hashing.hpp"

namespace cicle::vectorize {
namespace {

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
         c >= 0x80;
}

std::size_t utf8_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DataError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && !is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) continue;
    std::string token(text.substr(start, i - start));
    if (utf8_length(token) < 2) continue;
    for (auto& ch : token) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

SparseVector::SparseVector(std::vector<SparseEntry> entries, std::size_t dimension)
    : entries_(std::move(entries)), dimension_(dimension) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].index >= dimension_ || (i > 0 && entries_[i].index <= entries_[i - 1].index)) {
      throw DataError("sparse vector indices must be strictly increasing and below the dimension");
    }
  }
}

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * e.value;
  return std::sqrt(s);
}

double SparseVector::dot(const SparseVector& other) const {
  check_dims(dimension_, other.dimension_);
  double s = 0.0;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  while (a != entries_.end() && b != other.entries_.end()) {
    if (a->index < b->index) {
      ++a;
    } else if (b->index < a->index) {
      ++b;
    } else {
      s += a->value * b->value;
      ++a;
      ++b;
    }
  }
  return s;
}

TfidfModel TfidfModel::fit(std::span<const std::string> corpus) {
  if (corpus.empty()) throw DataError("fit_tfidf: empty corpus");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    auto tokens = tokenize(doc);
    std::set<std::string> unique(std::make_move_iterator(tokens.begin()),
                                 std::make_move_iterator(tokens.end()));
    for (const auto& t : unique) ++df[t];
  }
  if (df.empty()) throw DataError("fit_tfidf: empty vocabulary (no token of >= 2 word characters)");

  TfidfModel model;
  model.documents_ = corpus.size();
  const double n = static_cast<double>(corpus.size());
  model.terms_.reserve(df.size());
  model.idf_.reserve(df.size());
  for (const auto& [term, count] : df) {
    model.terms_.push_back(term);
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  model.index_terms();
  return model;
}

void TfidfModel::index_terms() {
  vocabulary_.clear();
  vocabulary_.reserve(terms_.size());
  std::ostringstream digest_input;
  digest_input.precision(17);
  for (std::uint32_t i = 0; i < terms_.size(); ++i) {
    vocabulary_.emplace(terms_[i], i);
    digest_input << terms_[i] << '\t' << idf_[i] << '\n';
  }
  hash_ = sha256_hex(digest_input.str());
}

std::optional<std::uint32_t> TfidfModel::column(std::string_view token) const {
  const auto it = vocabulary_.find(std::string(token));
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

SparseVector TfidfModel::transform(std::string_view text) const {
  std::map<std::uint32_t, double> counts;
  for (const auto& token : tokenize(text)) {
    if (auto col = column(token)) counts[*col] += 1.0;
  }
  std::vector<SparseEntry> entries;
  entries.reserve(counts.size());
  double sq = 0.0;
  for (const auto& [col, count] : counts) {
    const double v = count * idf_[col];
    entries.push_back({col, v});
    sq += v * v;
  }
  if (sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sq);
    for (auto& e : entries) e.value *= inv;
  }
  return SparseVector(std::move(entries), terms_.size());
}

std::vector<SparseVector> TfidfModel::transform_all(std::span<const std::string> texts) const {
  std::vector<SparseVector> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(transform(t));
  return out;
}

nlohmann::json TfidfModel::to_json() const {
  return {{"documents", documents_}, {"terms", terms_}, {"idf", idf_}, {"vocabulary_hash", hash_}};
}

TfidfModel TfidfModel::from_json(const nlohmann::json& j) {
  TfidfModel model;
  model.documents_ = j.at("documents").get<std::size_t>();
  model.terms_ = j.at("terms").get<std::vector<std::string>>();
  model.idf_ = j.at("idf").get<std::vector<double>>();
  if (model.terms_.size() != model.idf_.size()) throw DataError("tfidf: terms/idf length mismatch");
  model.index_terms();
  return model;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  check_dims(a.dimension(), b.dimension());
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double cosine(const DenseVector& a, const DenseVector& b) {
  check_dims(a.dimension(), b.dimension());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    na += a.values[i] * a.values[i];
    nb += b.values[i] * b.values[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace cicle::vectorize
