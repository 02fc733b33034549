#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cicle/classifier.hpp"
#include "cicle/conformal.hpp"
#include "cicle/corpus.hpp"
#include "cicle/embedding.hpp"
#include "cicle/llm_client.hpp"
#include "cicle/prompting.hpp"
#include "cicle/vectorize.hpp"

namespace cicle::pipeline {

enum class Strategy { base, fewshot_random, fewshot_sparse, fewshot_dense, cicle };

std::string_view to_string(Strategy s);
// Throws UsageError for unknown names.
Strategy parse_strategy(std::string_view name);
bool uses_llm(Strategy s);
const std::vector<Strategy>& all_strategies();

struct PredictionRecord {
  std::string item_id;
  Strategy strategy = Strategy::base;
  std::optional<classifier::Distribution> base_probs;
  std::optional<conformal::ConformalSet> conformal_set;
  bool bypassed = false;
  std::optional<prompting::PromptStats> prompt_stats;
  std::optional<std::string> llm_raw;
  std::optional<std::size_t> final_label;  // nullopt = Invalid
  std::size_t gold_label = 0;
  std::optional<std::string> error;

  bool correct() const { return final_label && *final_label == gold_label; }
  bool covered() const { return conformal_set && conformal_set->contains(gold_label); }

  nlohmann::ordered_json to_json(const corpus::LabelSpace& labels) const;
  static PredictionRecord from_json(const nlohmann::json& j, const corpus::LabelSpace& labels);
};

void write_records(const std::filesystem::path& path, std::span<const PredictionRecord> records,
                   const corpus::LabelSpace& labels);
std::vector<PredictionRecord> read_records(const std::filesystem::path& path, const corpus::LabelSpace& labels);

struct PromptSettings {
  prompting::PromptTemplate tmpl = prompting::PromptTemplate::defaults();
  std::string task;
  std::size_t k = 2;
  prompting::TokenCounter counter;
};

// Shot candidates with precomputed representations; `sparse` and `dense` are
// either empty or aligned with `items`.
struct ShotPool {
  std::vector<corpus::LabeledText> items;
  std::vector<vectorize::SparseVector> sparse;
  std::vector<vectorize::DenseVector> dense;
};

PredictionRecord classify_base(const vectorize::TfidfModel& tfidf, const classifier::LogisticModel& model,
                               const corpus::LabeledText& item);

struct FewShotContext {
  const corpus::LabelSpace& labels;
  const ShotPool& pool;
  const PromptSettings& prompt;
  std::uint64_t seed = 0;
  const vectorize::TfidfModel* tfidf = nullptr;      // fewshot-sparse
  vectorize::EmbeddingClient* embedder = nullptr;    // fewshot-dense, uncached queries
  const std::unordered_map<std::string, vectorize::DenseVector>* query_dense = nullptr;
};

// Prompt over every class in label order, one LLM call. LLM failures yield an
// Invalid record with `error` set.
PredictionRecord classify_fewshot(const corpus::LabeledText& item, Strategy strategy, const FewShotContext& ctx,
                                  llm::LlmClient& llm);

struct CicleContext {
  const vectorize::TfidfModel& tfidf;
  const classifier::LogisticModel& model;
  const conformal::ConformalCalibration& calibration;
  const ShotPool& pool;  // sparse vectors under `tfidf`
  const PromptSettings& prompt;
};

// Singleton conformal sets bypass the LLM; larger sets prompt with k
// sparse-similar shots per candidate class in descending probability.
PredictionRecord classify_cicle(const corpus::LabeledText& item, const CicleContext& ctx, llm::LlmClient& llm);

struct DatasetSpec {
  std::string name;
  std::filesystem::path pool_path;
  std::filesystem::path test_path;
  corpus::LabelSpace labels;
  std::size_t min_size = 0;  // smaller sizes are skipped
  std::string task;          // substituted for {task}
};

struct RunConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<std::size_t> sizes{100, 200, 300, 400, 500, 1000, 2000, 3000, 4000, 5000};
  std::uint64_t seed = 42;
  double alpha = 0.05;
  std::size_t k = 2;
  std::vector<Strategy> strategies{Strategy::base, Strategy::fewshot_random, Strategy::fewshot_sparse,
                                   Strategy::fewshot_dense, Strategy::cicle};
  double calib_fraction = 0.2;
  PromptSettings prompt;  // `task` is taken from each DatasetSpec
  classifier::TrainConfig train;
  std::filesystem::path output_dir;
  std::size_t jobs = 1;
  bool force = false;
  int max_consecutive_failures = 5;
  // Descriptive only; recorded in the run manifest.
  std::string llm_endpoint;
  std::string embedding_endpoint;
  std::string token_vocabulary;

  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct RunServices {
  llm::LlmClient* llm = nullptr;
  vectorize::EmbeddingClient* embedder = nullptr;
};

enum class CellStatus { written, existing, skipped, failed };
std::string_view to_string(CellStatus s);

struct CellOutcome {
  std::string dataset;
  std::size_t size = 0;
  Strategy strategy = Strategy::base;
  CellStatus status = CellStatus::failed;
  std::filesystem::path file;  // relative to the output dir
  std::size_t records = 0;
  std::string message;
  bool transport_failure = false;
};

struct RunSummary {
  std::vector<CellOutcome> cells;
  bool any_failed() const;
  bool transport_failed() const;
};

std::string record_file_name(std::string_view dataset, std::size_t size, std::uint64_t seed, Strategy strategy);

// Classifies the whole test set for one (dataset, size, strategy) cell.
std::vector<PredictionRecord> run_cell(const DatasetSpec& dataset, std::span<const corpus::LabeledText> pool,
                                       std::span<const corpus::LabeledText> test, std::size_t size,
                                       Strategy strategy, const RunConfig& config, RunServices services);

// Runs every configured cell, writes one record file per cell under
// <output>/records and the run manifest to <output>/run_manifest.json.
// A failing cell is logged and reported; other cells proceed.
RunSummary run_experiment(const RunConfig& config, RunServices services);

}  // namespace cicle::pipeline
