#include "cicle/conformal.hpp"

#include <algorithm>
#include <cmath>

#include "cicle/error.hpp"

namespace cicle::conformal {

void ConformalConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw UsageError("alpha must lie in (0, 1)");
}

std::size_t quantile_rank(std::size_t n, double alpha) {
  // The epsilon keeps exact products such as 20 * 0.95 from rounding up a rank.
  const double target = static_cast<double>(n + 1) * (1.0 - alpha) - 1e-9;
  const auto r = static_cast<std::size_t>(std::max(1.0, std::ceil(target)));
  return r;
}

double nonconformity(const classifier::Distribution& probs, std::size_t label) {
  return 1.0 - probs.probs.at(label);
}

ConformalCalibration::ConformalCalibration(std::vector<double> scores, const ConformalConfig& config)
    : alpha_(config.alpha), scores_(std::move(scores)) {
  config.validate();
  if (scores_.empty()) throw DataError("conformal calibration needs at least one score");
  for (double s : scores_) {
    if (!(s >= 0.0 && s <= 1.0)) throw DataError("nonconformity score outside [0, 1]");
  }
  std::sort(scores_.begin(), scores_.end());
  rank_ = quantile_rank(scores_.size(), alpha_);
  q_hat_ = rank_ > scores_.size() ? 1.0 : scores_[rank_ - 1];
}

nlohmann::json ConformalCalibration::to_json() const {
  return {{"alpha", alpha_}, {"n", scores_.size()}, {"scores", scores_}, {"q_hat", q_hat_}};
}

ConformalCalibration ConformalCalibration::from_json(const nlohmann::json& j) {
  ConformalCalibration c(j.at("scores").get<std::vector<double>>(), {j.at("alpha").get<double>()});
  if (j.at("n").get<std::size_t>() != c.size() || j.at("q_hat").get<double>() != c.q_hat()) {
    throw DataError("conformal calibration file is inconsistent with its scores");
  }
  return c;
}

ConformalCalibration calibrate(const classifier::LogisticModel& model, std::span<const vectorize::SparseVector> X,
                               std::span<const std::size_t> y, const ConformalConfig& config) {
  if (X.empty()) throw DataError("calibrate: empty calibration set");
  if (X.size() != y.size()) throw DataError("calibrate: X and y differ in length");
  std::vector<double> scores;
  scores.reserve(X.size());
  for (std::size_t i = 0; i < X.size(); ++i) {
    // Clamp guards 1 - p from drifting a hair outside [0, 1].
    scores.push_back(std::clamp(nonconformity(model.predict_proba(X[i]), y[i]), 0.0, 1.0));
  }
  return ConformalCalibration(std::move(scores), config);
}

bool ConformalSet::contains(std::size_t class_index) const {
  return std::any_of(candidates.begin(), candidates.end(),
                     [&](const Candidate& c) { return c.class_index == class_index; });
}

std::vector<std::size_t> ConformalSet::classes() const {
  std::vector<std::size_t> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) out.push_back(c.class_index);
  return out;
}

ConformalSet predict_set(const ConformalCalibration& calibration, const classifier::Distribution& probs) {
  ConformalSet set;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (std::clamp(1.0 - probs[k], 0.0, 1.0) <= calibration.q_hat()) set.candidates.push_back({k, probs[k]});
  }
  if (set.candidates.empty()) {
    const auto top = probs.argmax();
    set.candidates.push_back({top, probs[top]});
    set.forced_fallback = true;
    return set;
  }
  std::stable_sort(set.candidates.begin(), set.candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.probability > b.probability; });
  return set;
}

}  // namespace cicle::conformal
