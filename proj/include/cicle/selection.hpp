#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cicle/corpus.hpp"
#include "cicle/vectorize.hpp"

namespace cicle::selection {

enum class Strategy { random, sparse, dense };

struct SelectionConfig {
  std::size_t k = 2;  // shots per class
  Strategy strategy = Strategy::sparse;
  std::uint64_t seed = 0;  // random strategy only

  void validate() const;
};

struct ClassShots {
  std::string label;
  std::vector<corpus::LabeledText> shots;
};

// Shots grouped per class, in the order of the `classes` argument.
struct ShotSet {
  std::vector<ClassShots> per_class;
  std::vector<std::string> missing_classes;  // classes that had no pool item

  std::size_t shot_count() const;
  std::size_t class_count() const noexcept { return per_class.size(); }
  std::vector<std::string> classes() const;
};

// Items whose id equals `exclude_id` are never selected.
ShotSet select_random(std::span<const corpus::LabeledText> pool, std::span<const std::string> classes,
                      const SelectionConfig& config, std::string_view exclude_id = {});

// Per class, the k items most cosine-similar to the query; ties keep pool order.
ShotSet select_sparse(std::span<const corpus::LabeledText> pool, std::span<const vectorize::SparseVector> pool_vectors,
                      const vectorize::SparseVector& query, std::span<const std::string> classes,
                      const SelectionConfig& config, std::string_view exclude_id = {});

ShotSet select_dense(std::span<const corpus::LabeledText> pool, std::span<const vectorize::DenseVector> pool_vectors,
                     const vectorize::DenseVector& query, std::span<const std::string> classes,
                     const SelectionConfig& config, std::string_view exclude_id = {});

}  // namespace cicle::selection
