#include <doctest.h>

#include <algorithm>
#include <random>

#include "cicle/error.hpp"
#include "cicle/evalreport.hpp"
#include "support.hpp"

using namespace cicle;
using namespace cicle::evalreport;
using pipeline::PredictionRecord;

namespace {

using Preds = std::vector<std::optional<std::size_t>>;

// Confusion-matrix macro-F1 written out longhand; Invalid is an extra column.
double brute_macro_f1(const Preds& preds, const std::vector<std::size_t>& golds, std::size_t K) {
  std::vector<std::vector<double>> m(K, std::vector<double>(K + 1, 0.0));
  for (std::size_t i = 0; i < golds.size(); ++i) m[golds[i]][preds[i] ? *preds[i] : K] += 1;
  double sum = 0;
  std::size_t present = 0;
  for (std::size_t k = 0; k < K; ++k) {
    double row = 0, col = 0;
    for (std::size_t j = 0; j <= K; ++j) row += m[k][j];
    for (std::size_t g = 0; g < K; ++g) col += m[g][k];
    if (row == 0) continue;
    ++present;
    const double tp = m[k][k];
    const double p = col > 0 ? tp / col : 0.0;
    const double r = tp / row;
    sum += p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  }
  return sum / static_cast<double>(present);
}

CellMetrics metrics_with_f1(double f1, double tokens = 0, double shots = 0) {
  CellMetrics m;
  m.n_items = 10;
  m.macro_f1 = f1;
  m.mean_token_count = tokens;
  m.mean_shot_count = shots;
  return m;
}

}  // namespace

TEST_CASE("macro_f1 examples") {
  const std::vector<std::size_t> golds{0, 0, 1, 1};
  CHECK(macro_f1(Preds{0, 1, 0, 1}, golds, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(macro_f1(Preds{0, 0, 1, 1}, golds, 2) == 1.0);
  CHECK(macro_f1(Preds(4, std::nullopt), golds, 2) == 0.0);
  // classes absent from golds are not averaged
  CHECK(macro_f1(Preds{0, 0}, std::vector<std::size_t>{0, 0}, 5) == 1.0);
  CHECK_THROWS_AS(macro_f1(Preds{}, std::vector<std::size_t>{}, 2), DataError);
  CHECK_THROWS_AS(macro_f1(Preds{0}, golds, 2), DataError);
}

TEST_CASE("macro_f1 matches a confusion-matrix oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t K = 2 + rng() % 5;
    const std::size_t n = 1 + rng() % 50;
    Preds preds;
    std::vector<std::size_t> golds;
    for (std::size_t i = 0; i < n; ++i) {
      golds.push_back(rng() % K);
      if (rng() % 7 == 0) preds.push_back(std::nullopt);
      else preds.push_back(rng() % K);
    }
    CHECK(macro_f1(preds, golds, K) == doctest::Approx(brute_macro_f1(preds, golds, K)).epsilon(1e-12));

    std::vector<std::size_t> perm(K);
    for (std::size_t k = 0; k < K; ++k) perm[k] = k;
    std::shuffle(perm.begin(), perm.end(), rng);
    Preds rp;
    std::vector<std::size_t> rg;
    for (std::size_t i = 0; i < n; ++i) {
      rg.push_back(perm[golds[i]]);
      rp.push_back(preds[i] ? std::optional<std::size_t>(perm[*preds[i]]) : std::nullopt);
    }
    CHECK(macro_f1(rp, rg, K) == doctest::Approx(macro_f1(preds, golds, K)).epsilon(1e-12));
  }
}

TEST_CASE("cell_metrics over records") {
  std::vector<PredictionRecord> records(4);
  for (std::size_t i = 0; i < 4; ++i) {
    records[i].item_id = std::to_string(i);
    records[i].strategy = pipeline::Strategy::cicle;
    records[i].gold_label = i % 2;
    records[i].final_label = i % 2;
    conformal::ConformalSet set;
    set.candidates = {{i % 2, 0.8}};
    if (i == 3) set.candidates = {{0, 0.5}, {2, 0.4}};
    records[i].conformal_set = set;
  }
  records[0].bypassed = true;
  records[1].bypassed = true;
  records[2].prompt_stats = prompting::PromptStats{100, 4, 2};
  records[3].prompt_stats = prompting::PromptStats{60, 2, 1};
  records[3].final_label = std::nullopt;
  const auto m = cell_metrics(records, 3);
  CHECK(m.n_items == 4);
  CHECK(m.mean_token_count == 40.0);
  CHECK(m.mean_shot_count == 1.5);
  CHECK(m.bypass_rate == 0.5);
  CHECK(m.invalid_rate == 0.25);
  REQUIRE(m.empirical_coverage);
  CHECK(*m.empirical_coverage == 0.75);

  records[0].conformal_set.reset();
  CHECK_FALSE(cell_metrics(records, 3).empirical_coverage);
}

TEST_CASE("aggregate over all sizes") {
  CellTable cells;
  cells[{"a", 100, Strategy::cicle}] = metrics_with_f1(0.7);
  cells[{"a", 200, Strategy::cicle}] = metrics_with_f1(0.9);
  cells[{"a", 100, Strategy::base}] = metrics_with_f1(0.5);
  cells[{"b", 100, Strategy::base}] = metrics_with_f1(0.1);
  const std::vector<std::size_t> sizes{100, 200};
  CHECK_THROWS_WITH_AS(aggregate_all_sizes(cells, "a", sizes), doctest::Contains("a/200/base"), DataError);
  cells[{"a", 200, Strategy::base}] = metrics_with_f1(0.6);
  const auto means = aggregate_all_sizes(cells, "a", sizes);
  CHECK(means.size() == 2);
  CHECK(means.at(Strategy::cicle) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(means.at(Strategy::base) == doctest::Approx(0.55).epsilon(1e-15));
}

TEST_CASE("regime aggregation") {
  const auto regimes = default_regimes();
  REQUIRE(regimes.size() == 3);
  CHECK(regimes[0] == Regime{"low", 100, 400});
  CHECK(regimes[1] == Regime{"medium", 500, 2000});
  CHECK(regimes[2] == Regime{"large", 3000, 5000});

  CellTable cells;
  const std::vector<std::size_t> sizes{100, 400, 500, 3000};
  const std::vector<std::string> datasets{"a", "b"};
  double v = 0.1;
  for (const auto& d : datasets)
    for (auto s : sizes) {
      cells[{d, s, Strategy::base}] = metrics_with_f1(v);
      v += 0.05;
    }
  const auto result = regime_aggregate(cells, regimes, sizes, datasets);
  REQUIRE(result.size() == 3);
  // a: .10 .15 .20 .25, b: .30 .35 .40 .45
  CHECK(result[0].means.at(Strategy::base) == doctest::Approx((0.10 + 0.15 + 0.30 + 0.35) / 4));
  CHECK(result[1].means.at(Strategy::base) == doctest::Approx((0.20 + 0.40) / 2));
  CHECK(result[2].means.at(Strategy::base) == doctest::Approx((0.25 + 0.45) / 2));

  const std::vector<std::size_t> shuffled{3000, 100, 500, 400};
  const std::vector<std::string> reversed{"b", "a"};
  CHECK(regime_aggregate(cells, regimes, shuffled, reversed) == result);

  const std::vector<std::size_t> gap{100, 2500};
  CHECK_THROWS_AS(regime_aggregate(cells, regimes, gap, datasets), DataError);
  const std::vector<std::size_t> no_large{100, 500};
  CHECK_THROWS_AS(regime_aggregate(cells, regimes, no_large, datasets), DataError);
}

TEST_CASE("prompt and shot reductions") {
  CellTable cells;
  const std::vector<std::size_t> sizes{100};
  auto set = [&](Strategy s, double tokens, double shots) { cells[{"a", 100, s}] = metrics_with_f1(0.5, tokens, shots); };
  set(Strategy::fewshot_random, 100, 8);
  set(Strategy::fewshot_sparse, 100, 8);
  set(Strategy::fewshot_dense, 100, 8);
  set(Strategy::cicle, 75, 2);
  auto r = reduction_stats(cells, "a", sizes);
  CHECK(r.prompt_reduction_pct == doctest::Approx(25.0).epsilon(1e-12));
  CHECK(r.shot_reduction_pct == doctest::Approx(75.0).epsilon(1e-12));

  set(Strategy::cicle, 100, 8);
  r = reduction_stats(cells, "a", sizes);
  CHECK(r.prompt_reduction_pct == 0.0);
  CHECK(r.shot_reduction_pct == 0.0);

  set(Strategy::cicle, 120, 8);
  CHECK(reduction_stats(cells, "a", sizes).prompt_reduction_pct == doctest::Approx(-20.0));

  set(Strategy::fewshot_random, 0, 0);
  set(Strategy::fewshot_sparse, 0, 0);
  set(Strategy::fewshot_dense, 0, 0);
  CHECK_THROWS_AS(reduction_stats(cells, "a", sizes), DataError);
  cells.erase({"a", 100, Strategy::fewshot_dense});
  CHECK_THROWS_AS(reduction_stats(cells, "a", sizes), DataError);
}

namespace {

pipeline::RunConfig report_run(const testing::TempDir& data_dir, const std::filesystem::path& out) {
  const auto pool = testing::topic_corpus(500, 21, 3, 1, 3, "p");
  const auto test = testing::topic_corpus(90, 22, 3, 1, 3, "t");
  corpus::write_jsonl(data_dir / "pool.jsonl", pool);
  corpus::write_jsonl(data_dir / "test.jsonl", test);
  pipeline::DatasetSpec spec;
  spec.name = "topics";
  spec.pool_path = data_dir / "pool.jsonl";
  spec.test_path = data_dir / "test.jsonl";
  spec.labels = corpus::LabelSpace(testing::topic_labels(3));
  pipeline::RunConfig config;
  config.datasets = {spec};
  config.sizes = {100, 200};
  config.strategies = {Strategy::base, Strategy::fewshot_random, Strategy::fewshot_sparse, Strategy::cicle};
  config.output_dir = out;
  return config;
}

}  // namespace

TEST_CASE("build_report and emit_report") {
  testing::TempDir data, out, r1, r2;
  const auto config = report_run(data, out.path());
  llm::LlmConfig lc;
  llm::LlmClient llm(lc, llm::make_oracle("perfect"));
  pipeline::run_experiment(config, {&llm, nullptr});

  const auto report = build_report(out.path());
  CHECK(report.cells.size() == 8);
  CHECK(report.aggregates.at("topics").size() == 4);
  CHECK(report.reductions.empty());  // no dense baseline
  CHECK(report.regimes.empty());     // medium and large regimes unpopulated
  const auto& cicle_cell = report.cells.at({"topics", 100, Strategy::cicle});
  REQUIRE(cicle_cell.empirical_coverage);
  CHECK(report.cells.at({"topics", 100, Strategy::base}).mean_token_count == 0.0);
  CHECK(report.cells.at({"topics", 100, Strategy::fewshot_random}).mean_shot_count == 6.0);

  CHECK(RunReport::from_json(nlohmann::json::parse(report.to_json().dump())) == report);

  const auto files1 = emit_report(report, r1.path(), Format::both);
  const auto files2 = emit_report(build_report(out.path()), r2.path(), Format::both);
  REQUIRE(files1.size() == 6);
  for (std::size_t i = 0; i < files1.size(); ++i) {
    CHECK(files1[i].filename() == files2[i].filename());
    CHECK(testing::read_text(files1[i]) == testing::read_text(files2[i]));
  }
  const auto header = testing::read_text(r1 / "cells.csv").substr(0, testing::read_text(r1 / "cells.csv").find('\n'));
  CHECK(header ==
        "dataset,size,strategy,n_items,macro_f1,mean_token_count,mean_shot_count,bypass_rate,invalid_rate,"
        "empirical_coverage");
  CHECK(emit_report(report, r1.path(), Format::json).size() == 1);
  CHECK(parse_format("csv") == Format::csv);
  CHECK_THROWS_AS(parse_format("xml"), UsageError);

  std::filesystem::remove(out.path() / "records" / pipeline::record_file_name("topics", 100, 42, Strategy::cicle));
  std::filesystem::remove(out.path() / "records" / pipeline::record_file_name("topics", 200, 42, Strategy::base));
  try {
    build_report(out.path());
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("topics/100/cicle") != std::string::npos);
    CHECK(what.find("topics/200/base") != std::string::npos);
  }
}

TEST_CASE("build_report rejects edited record files") {
  testing::TempDir data, out;
  auto config = report_run(data, out.path());
  config.strategies = {Strategy::base};
  pipeline::run_experiment(config, {});
  const auto file = out.path() / "records" / pipeline::record_file_name("topics", 100, 42, Strategy::base);
  testing::write_text(file, testing::read_text(file) + "\n");
  CHECK_THROWS_AS(build_report(out.path()), DataError);
}
