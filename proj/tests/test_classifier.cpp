#include <doctest.h>

#include <cmath>
#include <random>

#include "cicle/classifier.hpp"
#include "cicle/error.hpp"
#include "support.hpp"

using namespace cicle;
using namespace cicle::classifier;
using vectorize::SparseVector;

namespace {

struct Instance {
  std::size_t K, V;
  std::vector<SparseVector> X;
  std::vector<std::size_t> y;
};

Instance random_instance(std::mt19937_64& rng, std::size_t K, std::size_t V, std::size_t n) {
  std::normal_distribution<double> gauss;
  Instance inst{K, V, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<vectorize::SparseEntry> entries;
    for (std::uint32_t j = 0; j < V; ++j) {
      if (rng() % 3 != 0) entries.push_back({j, gauss(rng)});
    }
    inst.X.emplace_back(std::move(entries), V);
    inst.y.push_back(i < K ? i : rng() % K);
  }
  return inst;
}

// Dense re-derivation of the penalised loss, indexing W as a K x V matrix.
double reference_objective(const Instance& inst, const std::vector<std::vector<double>>& W, const std::vector<double>& b,
                           double C) {
  double loss = 0.0;
  for (std::size_t i = 0; i < inst.X.size(); ++i) {
    std::vector<double> x(inst.V, 0.0);
    for (const auto& e : inst.X[i].entries()) x[e.index] = e.value;
    std::vector<double> z(inst.K);
    for (std::size_t k = 0; k < inst.K; ++k) {
      z[k] = b[k];
      for (std::size_t j = 0; j < inst.V; ++j) z[k] += W[k][j] * x[j];
    }
    double m = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - m);
    loss += -(z[inst.y[i]] - m - std::log(s));
  }
  double reg = 0.0;
  for (const auto& row : W) {
    for (double w : row) reg += w * w;
  }
  return loss + reg / (2.0 * C);
}

std::vector<double> pack(const std::vector<std::vector<double>>& W, const std::vector<double>& b) {
  const std::size_t K = W.size(), V = W[0].size();
  std::vector<double> p(parameter_count(K, V));
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t j = 0; j < V; ++j) p[j * K + k] = W[k][j];
    p[V * K + k] = b[k];
  }
  return p;
}

corpus::LabelSpace labels_of_size(std::size_t K) {
  std::vector<std::string> names;
  for (std::size_t k = 0; k < K; ++k) names.push_back("c" + std::to_string(k));
  return corpus::LabelSpace(names);
}

}  // namespace

TEST_CASE("softmax and argmax") {
  const std::vector<double> zeros(4, 0.0);
  for (double p : softmax(zeros)) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));
  const std::vector<double> logits{std::log(2.0), 0.0};
  const auto p = softmax(logits);
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const std::vector<double> big{1000.0, 1001.0, 999.0};
  const auto q = softmax(big);
  CHECK(std::isfinite(q[0]));
  CHECK(q[0] + q[1] + q[2] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(Distribution{{0.1, 0.7, 0.2}}.argmax() == 1);
  CHECK(Distribution{{0.5, 0.5}}.argmax() == 0);
  CHECK(Distribution{{0.25, 0.25, 0.25, 0.25}}.argmax() == 0);
  CHECK_THROWS_AS(argmax(std::vector<double>{}), DataError);
}

TEST_CASE("softmax is shift invariant and argmax survives monotone transforms") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 3.0);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> z(5);
    for (auto& v : z) v = gauss(rng);
    auto shifted = z;
    const double c = gauss(rng) * 10.0;
    for (auto& v : shifted) v += c;
    const auto a = softmax(z);
    const auto b = softmax(shifted);
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-12);
    auto cubed = z;
    for (auto& v : cubed) v = v * v * v + 2.0 * v;
    CHECK(argmax(z) == argmax(cubed));
  }
}

TEST_CASE("zero model predicts uniform probabilities") {
  const auto model = LogisticModel::zeros(labels_of_size(4), 3);
  const SparseVector x({{0, 0.3}, {2, 0.9}}, 3);
  const auto p = model.predict_proba(x);
  for (double v : p.probs) CHECK(v == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(model.predict(x) == 0);
  CHECK_THROWS_AS(model.predict_proba(SparseVector({}, 5)), DataError);
}

TEST_CASE("bias-only model: b = (ln 2, 0) gives (2/3, 1/3)") {
  std::vector<double> params(parameter_count(2, 2), 0.0);
  params[2 * 2 + 0] = std::log(2.0);
  const LogisticModel model(labels_of_size(2), 2, params);
  const auto p = model.predict_proba(SparseVector({{1, 5.0}}, 2));
  CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(model.bias(0) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("objective matches a dense re-derivation") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_instance(rng, 3, 5, 8);
    std::vector<std::vector<double>> W(3, std::vector<double>(5));
    std::vector<double> b(3);
    for (auto& row : W) {
      for (auto& w : row) w = gauss(rng);
    }
    for (auto& v : b) v = gauss(rng);
    const double C = 0.5 + trial * 0.3;
    const double got = objective(inst.X, inst.y, 3, 5, pack(W, b), C, nullptr);
    CHECK(got == doctest::Approx(reference_objective(inst, W, b, C)).epsilon(1e-12));
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> gauss;
  const double h = 1e-5;
  for (int trial = 0; trial < 10; ++trial) {
    const auto inst = random_instance(rng, 3, 5, 10);
    std::vector<double> params(parameter_count(3, 5));
    for (auto& p : params) p = gauss(rng) * 0.5;
    std::vector<double> grad;
    objective(inst.X, inst.y, 3, 5, params, 1.0, &grad);
    REQUIRE(grad.size() == params.size());
    double max_rel = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto plus = params, minus = params;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (objective(inst.X, inst.y, 3, 5, plus, 1.0, nullptr) -
                         objective(inst.X, inst.y, 3, 5, minus, 1.0, nullptr)) /
                        (2.0 * h);
      max_rel = std::max(max_rel, std::abs(fd - grad[i]) / std::max(1.0, std::abs(fd)));
    }
    CHECK(max_rel < 1e-5);
  }
}

TEST_CASE("train separates two singleton classes") {
  const std::vector<SparseVector> X{SparseVector({{0, 1.0}}, 2), SparseVector({{1, 1.0}}, 2)};
  const std::vector<std::size_t> y{0, 1};
  const auto model = train(X, y, labels_of_size(2), {});
  CHECK(model.predict(X[0]) == 0);
  CHECK(model.predict(X[1]) == 1);
  CHECK(model.summary().converged);
  CHECK(model.summary().gradient_inf_norm <= 1e-4);
}

TEST_CASE("train: objective decreases monotonically and ends below zero-init") {
  std::mt19937_64 rng(31);
  const auto inst = random_instance(rng, 4, 12, 60);
  const auto model = train(inst.X, inst.y, labels_of_size(4), {});
  const auto& s = model.summary();
  CHECK(s.final_objective < s.initial_objective);
  for (std::size_t i = 1; i < s.objective_trace.size(); ++i) CHECK(s.objective_trace[i] <= s.objective_trace[i - 1]);
  CHECK(s.initial_objective == doctest::Approx(60.0 * std::log(4.0)).epsilon(1e-12));
  if (s.converged) CHECK(s.gradient_inf_norm <= 1e-4);
  for (const auto& x : inst.X) {
    const auto p = model.predict_proba(x);
    double sum = 0.0;
    for (double v : p.probs) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("train is deterministic") {
  std::mt19937_64 rng(37);
  const auto inst = random_instance(rng, 3, 6, 30);
  const auto a = train(inst.X, inst.y, labels_of_size(3), {});
  const auto b = train(inst.X, inst.y, labels_of_size(3), {});
  CHECK(a.parameters() == b.parameters());
}

TEST_CASE("train errors and non-convergence flag") {
  const std::vector<SparseVector> X{SparseVector({{0, 1.0}}, 2), SparseVector({{1, 1.0}}, 2)};
  const std::vector<std::size_t> same{1, 1};
  CHECK_THROWS_AS(train(X, same, labels_of_size(2), {}), DataError);
  const std::vector<std::size_t> bad{0, 5};
  CHECK_THROWS_AS(train(X, bad, labels_of_size(2), {}), DataError);
  CHECK_THROWS_AS(train(X, std::vector<std::size_t>{0}, labels_of_size(2), {}), DataError);
  CHECK_THROWS_AS((TrainConfig{0.0, 1e-4, 10}.validate()), UsageError);
  CHECK_THROWS_AS((TrainConfig{1.0, 0.0, 10}.validate()), UsageError);

  std::mt19937_64 rng(41);
  const auto inst = random_instance(rng, 3, 8, 40);
  const auto capped = train(inst.X, inst.y, labels_of_size(3), {1.0, 1e-12, 2});
  CHECK_FALSE(capped.summary().converged);
  CHECK(capped.summary().iterations <= 2);
}

TEST_CASE("model json round-trip and vocabulary hash check") {
  std::mt19937_64 rng(43);
  const auto inst = random_instance(rng, 3, 4, 20);
  const auto model = train(inst.X, inst.y, labels_of_size(3), {}, "vocab-1");
  const auto back = LogisticModel::from_json(model.to_json(), "vocab-1");
  CHECK(back.parameters() == model.parameters());
  CHECK(back.labels() == model.labels());
  CHECK_THROWS_AS(LogisticModel::from_json(model.to_json(), "vocab-2"), DataError);

  testing::TempDir dir;
  model.save(dir / "m.json");
  CHECK(LogisticModel::load(dir / "m.json", "vocab-1").parameters() == model.parameters());
  CHECK_THROWS_AS(LogisticModel::load(dir / "m.json", "other"), DataError);
}
