#pragma once

#include <cstddef>
#include <filesystem>
#include <json.hpp>
#include <span>
#include <string>
#include <vector>

#include "cicle/corpus.hpp"
#include "cicle/vectorize.hpp"

namespace cicle::classifier {

struct TrainConfig {
  double C = 1.0;       // inverse l2 penalty weight
  double tol = 1e-4;    // stop when the gradient inf-norm drops to this
  int max_iter = 1000;

  void validate() const;
};

// Probability vector over the label space.
struct Distribution {
  std::vector<double> probs;

  std::size_t size() const noexcept { return probs.size(); }
  double operator[](std::size_t k) const { return probs[k]; }
  // Lowest index wins ties.
  std::size_t argmax() const;
};

std::size_t argmax(std::span<const double> values);
// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> logits);

struct TrainingSummary {
  bool converged = false;
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  double gradient_inf_norm = 0.0;
  std::vector<double> objective_trace;  // accepted iterates, starting at zero init
};

// Parameter vector layout shared by the objective and the model:
// weight(k, j) at [j * K + k], bias(k) at [V * K + k].
std::size_t parameter_count(std::size_t num_classes, std::size_t dimension);

// Penalised negative log-likelihood
//   sum_i -ln softmax(W x_i + b)_{y_i} + ||W||_F^2 / (2C)
// with the bias unregularised. Fills `gradient` when non-null.
double objective(std::span<const vectorize::SparseVector> X, std::span<const std::size_t> y,
                 std::size_t num_classes, std::size_t dimension, std::span<const double> params, double C,
                 std::vector<double>* gradient);

class LogisticModel {
 public:
  LogisticModel() = default;
  LogisticModel(corpus::LabelSpace labels, std::size_t dimension, std::vector<double> params,
                std::string vocabulary_hash = {});

  static LogisticModel zeros(corpus::LabelSpace labels, std::size_t dimension);

  std::size_t num_classes() const noexcept { return labels_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const corpus::LabelSpace& labels() const noexcept { return labels_; }
  const std::vector<double>& parameters() const noexcept { return params_; }
  double weight(std::size_t k, std::size_t j) const { return params_[j * num_classes() + k]; }
  double bias(std::size_t k) const { return params_[dimension_ * num_classes() + k]; }
  const std::string& vocabulary_hash() const noexcept { return vocabulary_hash_; }
  const TrainingSummary& summary() const noexcept { return summary_; }
  void set_summary(TrainingSummary s) { summary_ = std::move(s); }

  std::vector<double> logits(const vectorize::SparseVector& x) const;
  Distribution predict_proba(const vectorize::SparseVector& x) const;
  std::size_t predict(const vectorize::SparseVector& x) const;

  nlohmann::json to_json() const;
  // Refuses a model trained against a different vocabulary.
  static LogisticModel from_json(const nlohmann::json& j, const std::string& expected_vocabulary_hash);
  void save(const std::filesystem::path& path) const;
  static LogisticModel load(const std::filesystem::path& path, const std::string& expected_vocabulary_hash);

 private:
  void check_input(const vectorize::SparseVector& x) const;

  corpus::LabelSpace labels_;
  std::size_t dimension_ = 0;
  std::vector<double> params_;
  std::string vocabulary_hash_;
  TrainingSummary summary_;
};

// Full-batch L-BFGS from zero initialisation with Armijo backtracking.
// Throws DataError on fewer than two distinct classes or invalid indices.
// Non-convergence is reported through summary().converged.
LogisticModel train(std::span<const vectorize::SparseVector> X, std::span<const std::size_t> y,
                    const corpus::LabelSpace& labels, const TrainConfig& config,
                    std::string vocabulary_hash = {});

}  // namespace cicle::classifier
