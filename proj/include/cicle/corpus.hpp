#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cicle::corpus {

struct LabeledText {
  std::string id;
  std::string text;
  std::string label;

  bool operator==(const LabeledText&) const = default;
};

// Ordered universe of class names. Position in `labels()` is the class index
// used everywhere else (classifier rows, conformal candidates, records).
class LabelSpace {
 public:
  static constexpr std::size_t kMinLabels = 2;
  static constexpr std::size_t kMaxLabels = 1000;

  LabelSpace() = default;
  // Throws DataError on duplicates or a size outside [2, 1000].
  explicit LabelSpace(std::vector<std::string> labels);

  // Sorted set of distinct labels found in `items`.
  static LabelSpace from_items(std::span<const LabeledText> items);

  std::size_t size() const noexcept { return labels_.size(); }
  bool empty() const noexcept { return labels_.empty(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& name(std::size_t index) const { return labels_.at(index); }
  std::optional<std::size_t> find(std::string_view label) const;
  // Throws DataError for unknown labels.
  std::size_t index_of(std::string_view label) const;

  bool operator==(const LabelSpace& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct DatasetSplit {
  std::vector<LabeledText> train;
  std::vector<LabeledText> calibration;
  std::vector<LabeledText> test;
  std::uint64_t seed = 0;
};

enum class Format { jsonl, csv };

struct Dataset {
  std::vector<LabeledText> items;
  LabelSpace labels;
};

// Picks the format from the file extension (.jsonl/.json -> jsonl, .csv -> csv).
Format format_from_path(const std::filesystem::path& path);

// JSONL rows carry `id`, `text` and either `label` or a non-empty `labels`
// array (reduced to its primary label). CSV needs a `text,label` header;
// ids are synthesized from the 1-based data row number.
Dataset load_dataset(const std::filesystem::path& path, Format format);

std::vector<LabeledText> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, std::span<const LabeledText> items);

// Multi-label reduction: the first label in stored order is the primary one.
LabeledText reduce_primary_label(std::string id, std::string text,
                                 std::span<const std::string> labels);

// Largest-remainder apportionment of `n` over `class_counts`. Ties on equal
// remainders go to the lower class position. Requires n <= sum(class_counts).
std::vector<std::size_t> apportion(std::span<const std::size_t> class_counts, std::size_t n);

// Class-stratified sample of size n. Selected items keep their input order.
std::vector<LabeledText> stratified_subsample(std::span<const LabeledText> data, std::size_t n,
                                              std::uint64_t seed);

// Splits `data` into train and calibration parts; `test` is left empty
// because the test set is frozen separately.
DatasetSplit stratified_split(std::span<const LabeledText> data, double calib_fraction,
                              std::uint64_t seed);

// Per-label item counts in label-space order (labels absent from the space throw).
std::vector<std::size_t> class_counts(std::span<const LabeledText> data, const LabelSpace& labels);

}  // namespace cicle::corpus
