#include "cicle/classifier.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <numeric>
#include <set>

#include "cicle/error.hpp"

namespace cicle::classifier {
namespace {

using vectorize::SparseVector;

constexpr std::size_t kHistory = 10;
constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-20;

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double inf_norm(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

void logits_into(std::span<const double> params, std::size_t K, std::size_t V, const SparseVector& x,
                 std::span<double> z) {
  const double* bias = params.data() + V * K;
  std::copy(bias, bias + K, z.begin());
  for (const auto& e : x.entries()) {
    const double* w = params.data() + static_cast<std::size_t>(e.index) * K;
    for (std::size_t k = 0; k < K; ++k) z[k] += w[k] * e.value;
  }
}

// In place: z <- softmax(z); returns log-sum-exp of the original logits.
double softmax_inplace(std::span<double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double s = 0.0;
  for (auto& v : z) {
    v = std::exp(v - m);
    s += v;
  }
  for (auto& v : z) v /= s;
  return m + std::log(s);
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

// Two-loop recursion: returns -H g.
std::vector<double> lbfgs_direction(const std::vector<double>& g, const std::deque<Pair>& history) {
  std::vector<double> q = g;
  std::vector<double> alpha(history.size());
  for (std::size_t i = history.size(); i-- > 0;) {
    alpha[i] = history[i].rho * dot(history[i].s, q);
    for (std::size_t t = 0; t < q.size(); ++t) q[t] -= alpha[i] * history[i].y[t];
  }
  if (!history.empty()) {
    const auto& last = history.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (auto& v : q) v *= gamma;
  }
  for (std::size_t i = 0; i < history.size(); ++i) {
    const double beta = history[i].rho * dot(history[i].y, q);
    for (std::size_t t = 0; t < q.size(); ++t) q[t] += history[i].s[t] * (alpha[i] - beta);
  }
  for (auto& v : q) v = -v;
  return q;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw UsageError("TrainConfig: C must be positive");
  if (!(tol > 0.0)) throw UsageError("TrainConfig: tol must be positive");
  if (max_iter < 0) throw UsageError("TrainConfig: max_iter must be non-negative");
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw DataError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

std::size_t Distribution::argmax() const { return classifier::argmax(probs); }

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> z(logits.begin(), logits.end());
  if (!z.empty()) softmax_inplace(z);
  return z;
}

std::size_t parameter_count(std::size_t num_classes, std::size_t dimension) {
  return (dimension + 1) * num_classes;
}

double objective(std::span<const SparseVector> X, std::span<const std::size_t> y, std::size_t K,
                 std::size_t V, std::span<const double> params, double C, std::vector<double>* gradient) {
  if (params.size() != parameter_count(K, V)) throw DataError("objective: parameter size mismatch");
  if (gradient) gradient->assign(params.size(), 0.0);
  std::vector<double> z(K);
  double loss = 0.0;
  for (std::size_t i = 0; i < X.size(); ++i) {
    logits_into(params, K, V, X[i], z);
    const double label_logit = z[y[i]];
    loss += softmax_inplace(z) - label_logit;
    if (!gradient) continue;
    z[y[i]] -= 1.0;  // z now holds p - e_y
    auto& g = *gradient;
    for (const auto& e : X[i].entries()) {
      double* gw = g.data() + static_cast<std::size_t>(e.index) * K;
      for (std::size_t k = 0; k < K; ++k) gw[k] += z[k] * e.value;
    }
    double* gb = g.data() + V * K;
    for (std::size_t k = 0; k < K; ++k) gb[k] += z[k];
  }
  double penalty = 0.0;
  for (std::size_t t = 0; t < V * K; ++t) {
    penalty += params[t] * params[t];
    if (gradient) (*gradient)[t] += params[t] / C;
  }
  return loss + penalty / (2.0 * C);
}

LogisticModel::LogisticModel(corpus::LabelSpace labels, std::size_t dimension, std::vector<double> params,
                             std::string vocabulary_hash)
    : labels_(std::move(labels)),
      dimension_(dimension),
      params_(std::move(params)),
      vocabulary_hash_(std::move(vocabulary_hash)) {
  if (params_.size() != parameter_count(labels_.size(), dimension_)) {
    throw DataError("logistic model: parameter count does not match K x (V + 1)");
  }
  for (double p : params_) {
    if (!std::isfinite(p)) throw DataError("logistic model: non-finite parameter");
  }
}

LogisticModel LogisticModel::zeros(corpus::LabelSpace labels, std::size_t dimension) {
  const auto n = parameter_count(labels.size(), dimension);
  return LogisticModel(std::move(labels), dimension, std::vector<double>(n, 0.0));
}

void LogisticModel::check_input(const SparseVector& x) const {
  if (x.dimension() != dimension_) {
    throw DataError("input dimension " + std::to_string(x.dimension()) + " does not match model dimension " +
                    std::to_string(dimension_));
  }
}

std::vector<double> LogisticModel::logits(const SparseVector& x) const {
  check_input(x);
  std::vector<double> z(num_classes());
  logits_into(params_, num_classes(), dimension_, x, z);
  return z;
}

Distribution LogisticModel::predict_proba(const SparseVector& x) const {
  auto z = logits(x);
  softmax_inplace(z);
  return Distribution{std::move(z)};
}

std::size_t LogisticModel::predict(const SparseVector& x) const { return predict_proba(x).argmax(); }

nlohmann::json LogisticModel::to_json() const {
  const std::size_t K = num_classes();
  std::vector<std::vector<double>> W(K, std::vector<double>(dimension_));
  std::vector<double> b(K);
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < dimension_; ++j) W[k][j] = weight(k, j);
    b[k] = bias(k);
  }
  return {{"format", "cicle-logistic/v1"},
          {"labels", labels_.labels()},
          {"dimension", dimension_},
          {"vocabulary_hash", vocabulary_hash_},
          {"converged", summary_.converged},
          {"iterations", summary_.iterations},
          {"W", W},
          {"b", b}};
}

LogisticModel LogisticModel::from_json(const nlohmann::json& j, const std::string& expected_vocabulary_hash) {
  if (j.value("format", "") != "cicle-logistic/v1") throw DataError("unknown logistic model format");
  const auto hash = j.at("vocabulary_hash").get<std::string>();
  if (hash != expected_vocabulary_hash) {
    throw DataError("logistic model vocabulary hash " + hash + " does not match " + expected_vocabulary_hash);
  }
  corpus::LabelSpace labels(j.at("labels").get<std::vector<std::string>>());
  const auto V = j.at("dimension").get<std::size_t>();
  const auto W = j.at("W").get<std::vector<std::vector<double>>>();
  const auto b = j.at("b").get<std::vector<double>>();
  const std::size_t K = labels.size();
  if (W.size() != K || b.size() != K) throw DataError("logistic model: W/b row count mismatch");
  std::vector<double> params(parameter_count(K, V));
  for (std::size_t k = 0; k < K; ++k) {
    if (W[k].size() != V) throw DataError("logistic model: W column count mismatch");
    for (std::size_t jj = 0; jj < V; ++jj) params[jj * K + k] = W[k][jj];
    params[V * K + k] = b[k];
  }
  LogisticModel model(std::move(labels), V, std::move(params), hash);
  model.summary_.converged = j.value("converged", false);
  model.summary_.iterations = j.value("iterations", 0);
  return model;
}

void LogisticModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump();
}

LogisticModel LogisticModel::load(const std::filesystem::path& path, const std::string& expected_vocabulary_hash) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return from_json(nlohmann::json::parse(in), expected_vocabulary_hash);
}

LogisticModel train(std::span<const SparseVector> X, std::span<const std::size_t> y,
                    const corpus::LabelSpace& labels, const TrainConfig& config, std::string vocabulary_hash) {
  config.validate();
  if (X.empty() || X.size() != y.size()) throw DataError("train: X and y must be non-empty and equally long");
  const std::size_t K = labels.size();
  const std::size_t V = X.front().dimension();
  std::set<std::size_t> present;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] >= K) throw DataError("train: class index out of range");
    if (X[i].dimension() != V) throw DataError("train: inconsistent input dimensions");
    present.insert(y[i]);
  }
  if (present.size() < 2) throw DataError("train: need at least two distinct classes");

  std::vector<double> x(parameter_count(K, V), 0.0);
  std::vector<double> g;
  double f = objective(X, y, K, V, x, config.C, &g);

  TrainingSummary summary;
  summary.initial_objective = f;
  summary.objective_trace.push_back(f);

  std::deque<Pair> history;
  std::vector<double> x_new(x.size());
  std::vector<double> g_new;
  int iter = 0;
  while (true) {
    if (inf_norm(g) <= config.tol) {
      summary.converged = true;
      break;
    }
    if (iter >= config.max_iter) break;

    auto d = lbfgs_direction(g, history);
    double gd = dot(g, d);
    if (!(gd < 0.0)) {
      history.clear();
      d = g;
      for (auto& v : d) v = -v;
      gd = -dot(g, g);
    }
    double step = history.empty() ? std::min(1.0, 1.0 / std::sqrt(-gd)) : 1.0;
    double f_new = 0.0;
    bool accepted = false;
    while (step >= kMinStep) {
      for (std::size_t t = 0; t < x.size(); ++t) x_new[t] = x[t] + step * d[t];
      f_new = objective(X, y, K, V, x_new, config.C, &g_new);
      if (std::isfinite(f_new) && f_new <= f + kArmijo * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (history.empty()) break;  // steepest descent cannot make progress either
      history.clear();
      continue;
    }

    Pair p{std::vector<double>(x.size()), std::vector<double>(x.size()), 0.0};
    for (std::size_t t = 0; t < x.size(); ++t) {
      p.s[t] = x_new[t] - x[t];
      p.y[t] = g_new[t] - g[t];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12 * dot(p.y, p.y)) {
      p.rho = 1.0 / sy;
      history.push_back(std::move(p));
      if (history.size() > kHistory) history.pop_front();
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    summary.objective_trace.push_back(f);
    ++iter;
  }

  summary.iterations = iter;
  summary.final_objective = f;
  summary.gradient_inf_norm = inf_norm(g);
  if (!summary.converged) {
    spdlog::warn("logistic regression did not converge in {} iterations (|g|_inf = {:.3g})", iter,
                 summary.gradient_inf_norm);
  }
  LogisticModel model(labels, V, std::move(x), std::move(vocabulary_hash));
  model.set_summary(std::move(summary));
  return model;
}

}  // namespace cicle::classifier
