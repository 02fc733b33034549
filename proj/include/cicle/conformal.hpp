#pragma once

#include <cstddef>
#include <json.hpp>
#include <span>
#include <vector>

#include "cicle/classifier.hpp"
#include "cicle/vectorize.hpp"

namespace cicle::conformal {

struct ConformalConfig {
  double alpha = 0.05;  // miscoverage level; sets aim for 1 - alpha coverage

  void validate() const;
};

// 1-based ascending rank of the calibration score used as threshold:
// ceil((n + 1)(1 - alpha)). A result above n means "include everything".
std::size_t quantile_rank(std::size_t n, double alpha);

// LAC nonconformity score 1 - p(label).
double nonconformity(const classifier::Distribution& probs, std::size_t label);

class ConformalCalibration {
 public:
  ConformalCalibration() = default;
  // Sorts the scores; throws DataError when empty or outside [0, 1].
  ConformalCalibration(std::vector<double> scores, const ConformalConfig& config);

  double alpha() const noexcept { return alpha_; }
  std::size_t size() const noexcept { return scores_.size(); }
  std::size_t rank() const noexcept { return rank_; }
  double q_hat() const noexcept { return q_hat_; }
  const std::vector<double>& scores() const noexcept { return scores_; }

  nlohmann::json to_json() const;
  static ConformalCalibration from_json(const nlohmann::json& j);

 private:
  double alpha_ = 0.05;
  std::vector<double> scores_;
  std::size_t rank_ = 0;
  double q_hat_ = 1.0;
};

ConformalCalibration calibrate(const classifier::LogisticModel& model,
                               std::span<const vectorize::SparseVector> X, std::span<const std::size_t> y,
                               const ConformalConfig& config);

struct Candidate {
  std::size_t class_index;
  double probability;

  bool operator==(const Candidate&) const = default;
};

struct ConformalSet {
  std::vector<Candidate> candidates;  // descending probability, ties by class index
  bool forced_fallback = false;

  std::size_t size() const noexcept { return candidates.size(); }
  bool contains(std::size_t class_index) const;
  std::vector<std::size_t> classes() const;
};

// Classes whose score 1 - p is <= q_hat. An empty raw set falls back to the
// argmax singleton with forced_fallback set.
ConformalSet predict_set(const ConformalCalibration& calibration, const classifier::Distribution& probs);

}  // namespace cicle::conformal
