#include "cicle/selection.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "cicle/error.hpp"
#include "cicle/hashing.hpp"
#include "cicle/random.hpp"

namespace cicle::selection {
namespace {

using corpus::LabeledText;

// Pool positions per class, in pool order, excluding the query item.
std::unordered_map<std::string_view, std::vector<std::size_t>> members_by_class(
    std::span<const LabeledText> pool, std::span<const std::string> classes, std::string_view exclude_id) {
  std::unordered_map<std::string_view, std::vector<std::size_t>> members;
  for (const auto& c : classes) members.try_emplace(c);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!exclude_id.empty() && pool[i].id == exclude_id) continue;
    if (auto it = members.find(pool[i].label); it != members.end()) it->second.push_back(i);
  }
  return members;
}

void check_classes(std::span<const std::string> classes) {
  std::unordered_map<std::string_view, int> seen;
  for (const auto& c : classes) {
    if (++seen[c] > 1) throw DataError("selection: duplicate class " + c);
  }
}

void note_missing(ShotSet& set) {
  if (set.missing_classes.empty()) return;
  std::string list;
  for (const auto& c : set.missing_classes) list += (list.empty() ? "" : ", ") + c;
  spdlog::warn("shot selection: no pool items for class(es): {}", list);
}

template <typename Similarity>
ShotSet select_by_similarity(std::span<const LabeledText> pool, std::size_t pool_vector_count,
                             std::span<const std::string> classes, const SelectionConfig& config,
                             std::string_view exclude_id, Similarity&& similarity) {
  config.validate();
  check_classes(classes);
  if (pool.empty()) throw DataError("shot selection: empty pool");
  if (pool_vector_count != pool.size()) throw DataError("selection: pool and vector counts differ");
  const auto members = members_by_class(pool, classes, exclude_id);
  ShotSet set;
  for (const auto& c : classes) {
    const auto& idx = members.at(c);
    ClassShots entry{c, {}};
    if (idx.empty()) set.missing_classes.push_back(c);
    std::vector<std::pair<double, std::size_t>> scored;
    scored.reserve(idx.size());
    for (auto i : idx) scored.emplace_back(similarity(i), i);
    const std::size_t take = std::min(config.k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [](const auto& a, const auto& b) {
                        return a.first > b.first || (a.first == b.first && a.second < b.second);
                      });
    for (std::size_t t = 0; t < take; ++t) entry.shots.push_back(pool[scored[t].second]);
    set.per_class.push_back(std::move(entry));
  }
  note_missing(set);
  return set;
}

}  // namespace

void SelectionConfig::validate() const {
  if (k == 0) throw UsageError("shots per class (k) must be at least 1");
}

std::size_t ShotSet::shot_count() const {
  std::size_t n = 0;
  for (const auto& c : per_class) n += c.shots.size();
  return n;
}

std::vector<std::string> ShotSet::classes() const {
  std::vector<std::string> out;
  out.reserve(per_class.size());
  for (const auto& c : per_class) out.push_back(c.label);
  return out;
}

ShotSet select_random(std::span<const LabeledText> pool, std::span<const std::string> classes,
                      const SelectionConfig& config, std::string_view exclude_id) {
  config.validate();
  check_classes(classes);
  if (pool.empty()) throw DataError("select_random: empty pool");
  const auto members = members_by_class(pool, classes, exclude_id);
  ShotSet set;
  for (const auto& c : classes) {
    const auto& idx = members.at(c);
    ClassShots entry{c, {}};
    if (idx.empty()) set.missing_classes.push_back(c);
    // Per-class generator so a class's draw does not depend on class order.
    Rng rng(mix_seed(config.seed, fnv1a64(c)));
    for (auto pos : sample_without_replacement(idx.size(), config.k, rng)) entry.shots.push_back(pool[idx[pos]]);
    set.per_class.push_back(std::move(entry));
  }
  note_missing(set);
  return set;
}

ShotSet select_sparse(std::span<const LabeledText> pool, std::span<const vectorize::SparseVector> pool_vectors,
                      const vectorize::SparseVector& query, std::span<const std::string> classes,
                      const SelectionConfig& config, std::string_view exclude_id) {
  return select_by_similarity(pool, pool_vectors.size(), classes, config, exclude_id,
                              [&](std::size_t i) { return vectorize::cosine(pool_vectors[i], query); });
}

ShotSet select_dense(std::span<const LabeledText> pool, std::span<const vectorize::DenseVector> pool_vectors,
                     const vectorize::DenseVector& query, std::span<const std::string> classes,
                     const SelectionConfig& config, std::string_view exclude_id) {
  return select_by_similarity(pool, pool_vectors.size(), classes, config, exclude_id,
                              [&](std::size_t i) { return vectorize::cosine(pool_vectors[i], query); });
}

}  // namespace cicle::selection
