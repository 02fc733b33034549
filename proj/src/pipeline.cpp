#include "cicle/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "cicle/error.hpp"
#include "cicle/hashing.hpp"
#include "cicle/selection.hpp"

namespace cicle::pipeline {
namespace {

using corpus::LabeledText;
using corpus::LabelSpace;
using nlohmann::ordered_json;

constexpr std::string_view kTransportPrefix = "transport: ";

std::vector<std::string> texts_of(std::span<const LabeledText> items) {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(item.text);
  return out;
}

std::vector<std::size_t> labels_of(std::span<const LabeledText> items, const LabelSpace& labels) {
  std::vector<std::size_t> out;
  out.reserve(items.size());
  for (const auto& item : items) out.push_back(labels.index_of(item.label));
  return out;
}

std::vector<std::string> shot_labels(const selection::ShotSet& shots) {
  std::vector<std::string> out;
  for (const auto& cls : shots.per_class) {
    for (std::size_t i = 0; i < cls.shots.size(); ++i) out.push_back(cls.label);
  }
  return out;
}

// Sends the prompt and fills llm_raw / final_label / error on `record`.
void ask_llm(PredictionRecord& record, const LabeledText& item, const prompting::Prompt& prompt,
             const selection::ShotSet& shots, const LabelSpace& labels, llm::LlmClient& llm) {
  record.prompt_stats = prompt.stats;
  llm::CompletionRequest request{item.id, prompt.text, shots.classes(), shot_labels(shots), item.label};
  try {
    auto response = llm.complete(request);
    record.final_label = llm::parse_label(response.raw, labels);
    record.llm_raw = std::move(response.raw);
  } catch (const TransportError& e) {
    record.final_label.reset();
    record.error = std::string(kTransportPrefix) + e.what();
  } catch (const Error& e) {
    record.final_label.reset();
    record.error = std::string("response: ") + e.what();
  }
}

bool is_transport_failure(const PredictionRecord& r) {
  return r.error && r.error->rfind(kTransportPrefix, 0) == 0;
}

// Classifies `items` with `jobs` workers; output order follows input order.
// Aborts with TransportError after `max_consecutive_failures` transport
// failures in a row.
template <typename Classify>
std::vector<PredictionRecord> classify_all(std::span<const LabeledText> items, std::size_t jobs,
                                           int max_consecutive_failures, Classify&& classify) {
  std::vector<PredictionRecord> records(items.size());
  std::atomic<std::size_t> next{0};
  std::atomic<int> consecutive{0};
  std::atomic<bool> stop{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t i = next.fetch_add(1);
      if (i >= items.size()) return;
      try {
        records[i] = classify(items[i]);
        if (is_transport_failure(records[i])) {
          if (max_consecutive_failures > 0 && ++consecutive >= max_consecutive_failures) {
            throw TransportError("endpoint unreachable: " + std::to_string(consecutive.load()) +
                                     " consecutive failed LLM calls; last: " + *records[i].error,
                                 items[i].id, 0, false);
          }
        } else if (records[i].prompt_stats) {
          consecutive = 0;
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        stop = true;
      }
    }
  };

  const std::size_t n_workers = std::max<std::size_t>(1, std::min(jobs, items.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

// State shared by all strategies of one (dataset, size) cell group.
class SizeWorkspace {
 public:
  SizeWorkspace(const DatasetSpec& dataset, std::span<const LabeledText> pool, std::size_t size,
                const RunConfig& config)
      : dataset_(dataset), config_(config) {
    if (size > pool.size()) {
      throw DataError(dataset.name + ": size " + std::to_string(size) + " exceeds pool of " +
                      std::to_string(pool.size()));
    }
    subsample_ = corpus::stratified_subsample(pool, size, mix_seed(config.seed, size));
  }

  // Base classifier, calibration and the CICLe shot pool (train split only).
  void ensure_base() {
    if (model_) return;
    split_ = corpus::stratified_split(subsample_, config_.calib_fraction, mix_seed(config_.seed ^ 0x5ca1ab1eULL, subsample_.size()));
    if (split_.train.empty() || split_.calibration.empty()) throw DataError("split produced an empty part");
    const auto train_texts = texts_of(split_.train);
    tfidf_ = vectorize::TfidfModel::fit(train_texts);
    cicle_pool_.items = split_.train;
    cicle_pool_.sparse = tfidf_->transform_all(train_texts);
    const auto y = labels_of(split_.train, dataset_.labels);
    model_ = classifier::train(cicle_pool_.sparse, y, dataset_.labels, config_.train, tfidf_->vocabulary_hash());
    const auto calib_x = tfidf_->transform_all(texts_of(split_.calibration));
    const auto calib_y = labels_of(split_.calibration, dataset_.labels);
    calibration_ = conformal::calibrate(*model_, calib_x, calib_y, {config_.alpha});
    spdlog::info("{} n={}: classifier {} after {} iterations, q_hat={:.4f} (n_cal={})", dataset_.name,
                 subsample_.size(), model_->summary().converged ? "converged" : "stopped",
                 model_->summary().iterations, calibration_->q_hat(), calibration_->size());
  }

  void ensure_fewshot_sparse() {
    if (fewshot_tfidf_) return;
    fewshot_pool_.items = subsample_;
    const auto texts = texts_of(subsample_);
    fewshot_tfidf_ = vectorize::TfidfModel::fit(texts);
    fewshot_pool_.sparse = fewshot_tfidf_->transform_all(texts);
  }

  void ensure_fewshot_dense(vectorize::EmbeddingClient& embedder) {
    fewshot_pool_.items = subsample_;
    if (fewshot_pool_.dense.size() == subsample_.size()) return;
    fewshot_pool_.dense = embedder.embed(texts_of(subsample_));
  }

  const std::vector<LabeledText>& subsample() const { return subsample_; }
  const vectorize::TfidfModel& tfidf() const { return *tfidf_; }
  const classifier::LogisticModel& model() const { return *model_; }
  const conformal::ConformalCalibration& calibration() const { return *calibration_; }
  const ShotPool& cicle_pool() const { return cicle_pool_; }
  ShotPool& fewshot_pool() { return fewshot_pool_; }
  const vectorize::TfidfModel& fewshot_tfidf() const { return *fewshot_tfidf_; }

 private:
  const DatasetSpec& dataset_;
  const RunConfig& config_;
  std::vector<LabeledText> subsample_;
  corpus::DatasetSplit split_;
  std::optional<vectorize::TfidfModel> tfidf_;
  std::optional<classifier::LogisticModel> model_;
  std::optional<conformal::ConformalCalibration> calibration_;
  ShotPool cicle_pool_;
  ShotPool fewshot_pool_;
  std::optional<vectorize::TfidfModel> fewshot_tfidf_;
};

std::unordered_map<std::string, vectorize::DenseVector> embed_queries(std::span<const LabeledText> test,
                                                                      vectorize::EmbeddingClient& embedder) {
  const auto vectors = embedder.embed(texts_of(test));
  std::unordered_map<std::string, vectorize::DenseVector> out;
  for (std::size_t i = 0; i < test.size(); ++i) out.emplace(test[i].id, vectors[i]);
  return out;
}

std::vector<PredictionRecord> classify_cell(SizeWorkspace& ws, const DatasetSpec& dataset,
                                            std::span<const LabeledText> test, Strategy strategy,
                                            const RunConfig& config, RunServices services,
                                            const std::unordered_map<std::string, vectorize::DenseVector>* query_dense) {
  PromptSettings prompt = config.prompt;
  prompt.task = dataset.task.empty() ? dataset.name : dataset.task;
  prompt.k = config.k;
  if (uses_llm(strategy) && !services.llm) throw UsageError("strategy " + std::string(to_string(strategy)) + " needs an LLM client");

  switch (strategy) {
    case Strategy::base: {
      ws.ensure_base();
      return classify_all(test, config.jobs, 0,
                          [&](const LabeledText& item) { return classify_base(ws.tfidf(), ws.model(), item); });
    }
    case Strategy::cicle: {
      ws.ensure_base();
      CicleContext ctx{ws.tfidf(), ws.model(), ws.calibration(), ws.cicle_pool(), prompt};
      return classify_all(test, config.jobs, config.max_consecutive_failures,
                          [&](const LabeledText& item) { return classify_cicle(item, ctx, *services.llm); });
    }
    case Strategy::fewshot_random:
    case Strategy::fewshot_sparse:
    case Strategy::fewshot_dense: {
      FewShotContext ctx{dataset.labels, ws.fewshot_pool(), prompt, config.seed};
      if (strategy == Strategy::fewshot_sparse) {
        ws.ensure_fewshot_sparse();
        ctx.tfidf = &ws.fewshot_tfidf();
      } else if (strategy == Strategy::fewshot_dense) {
        if (!services.embedder) throw UsageError("fewshot-dense needs an embedding endpoint");
        ws.ensure_fewshot_dense(*services.embedder);
        ctx.embedder = services.embedder;
        ctx.query_dense = query_dense;
      } else {
        ws.fewshot_pool().items = ws.subsample();
      }
      return classify_all(test, config.jobs, config.max_consecutive_failures, [&](const LabeledText& item) {
        return classify_fewshot(item, strategy, ctx, *services.llm);
      });
    }
  }
  throw UsageError("unhandled strategy");
}

ordered_json distribution_json(const classifier::Distribution& d) { return d.probs; }

void write_text_atomically(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp);
    out << content;
    if (!out) throw DataError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::base: return "base";
    case Strategy::fewshot_random: return "fewshot-random";
    case Strategy::fewshot_sparse: return "fewshot-sparse";
    case Strategy::fewshot_dense: return "fewshot-dense";
    case Strategy::cicle: return "cicle";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : all_strategies()) {
    if (to_string(s) == name) return s;
  }
  throw UsageError("unknown strategy: " + std::string(name));
}

bool uses_llm(Strategy s) { return s != Strategy::base; }

const std::vector<Strategy>& all_strategies() {
  static const std::vector<Strategy> all{Strategy::base, Strategy::fewshot_random, Strategy::fewshot_sparse,
                                         Strategy::fewshot_dense, Strategy::cicle};
  return all;
}

std::string_view to_string(CellStatus s) {
  switch (s) {
    case CellStatus::written: return "written";
    case CellStatus::existing: return "existing";
    case CellStatus::skipped: return "skipped";
    case CellStatus::failed: return "failed";
  }
  return "?";
}

ordered_json PredictionRecord::to_json(const LabelSpace& labels) const {
  ordered_json j;
  j["item_id"] = item_id;
  j["strategy"] = to_string(strategy);
  j["gold_label"] = labels.name(gold_label);
  j["final_label"] = final_label ? ordered_json(labels.name(*final_label)) : ordered_json(nullptr);
  j["bypassed"] = bypassed;
  if (base_probs) j["base_probs"] = distribution_json(*base_probs);
  if (conformal_set) {
    ordered_json candidates = ordered_json::array();
    for (const auto& c : conformal_set->candidates) {
      candidates.push_back({{"label", labels.name(c.class_index)}, {"probability", c.probability}});
    }
    j["conformal_set"] = {{"candidates", candidates}, {"forced_fallback", conformal_set->forced_fallback}};
  }
  if (prompt_stats) {
    j["prompt_stats"] = {{"token_count", prompt_stats->token_count},
                         {"shot_count", prompt_stats->shot_count},
                         {"candidate_count", prompt_stats->candidate_count}};
  }
  if (llm_raw) j["llm_raw"] = *llm_raw;
  if (error) j["error"] = *error;
  return j;
}

PredictionRecord PredictionRecord::from_json(const nlohmann::json& j, const LabelSpace& labels) {
  PredictionRecord r;
  try {
    r.item_id = j.at("item_id").get<std::string>();
    r.strategy = parse_strategy(j.at("strategy").get<std::string>());
    r.gold_label = labels.index_of(j.at("gold_label").get<std::string>());
    if (!j.at("final_label").is_null()) r.final_label = labels.index_of(j["final_label"].get<std::string>());
    r.bypassed = j.at("bypassed").get<bool>();
    if (j.contains("base_probs")) r.base_probs = classifier::Distribution{j["base_probs"].get<std::vector<double>>()};
    if (j.contains("conformal_set")) {
      conformal::ConformalSet set;
      for (const auto& c : j["conformal_set"].at("candidates")) {
        set.candidates.push_back({labels.index_of(c.at("label").get<std::string>()), c.at("probability").get<double>()});
      }
      set.forced_fallback = j["conformal_set"].at("forced_fallback").get<bool>();
      r.conformal_set = std::move(set);
    }
    if (j.contains("prompt_stats")) {
      const auto& s = j["prompt_stats"];
      r.prompt_stats = prompting::PromptStats{s.at("token_count").get<std::size_t>(), s.at("shot_count").get<std::size_t>(),
                                              s.at("candidate_count").get<std::size_t>()};
    }
    if (j.contains("llm_raw")) r.llm_raw = j["llm_raw"].get<std::string>();
    if (j.contains("error")) r.error = j["error"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed prediction record: ") + e.what());
  }
  return r;
}

void write_records(const std::filesystem::path& path, std::span<const PredictionRecord> records,
                   const LabelSpace& labels) {
  std::string content;
  for (const auto& r : records) {
    content += r.to_json(labels).dump();
    content += '\n';
  }
  write_text_atomically(path, content);
}

std::vector<PredictionRecord> read_records(const std::filesystem::path& path, const LabelSpace& labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open record file " + path.string());
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(PredictionRecord::from_json(nlohmann::json::parse(line), labels));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

PredictionRecord classify_base(const vectorize::TfidfModel& tfidf, const classifier::LogisticModel& model,
                               const LabeledText& item) {
  PredictionRecord r;
  r.item_id = item.id;
  r.strategy = Strategy::base;
  r.gold_label = model.labels().index_of(item.label);
  r.base_probs = model.predict_proba(tfidf.transform(item.text));
  r.final_label = r.base_probs->argmax();
  return r;
}

PredictionRecord classify_fewshot(const LabeledText& item, Strategy strategy, const FewShotContext& ctx,
                                  llm::LlmClient& llm) {
  PredictionRecord r;
  r.item_id = item.id;
  r.strategy = strategy;
  r.gold_label = ctx.labels.index_of(item.label);

  const auto& classes = ctx.labels.labels();
  selection::SelectionConfig sel{ctx.prompt.k, selection::Strategy::random, ctx.seed ^ fnv1a64(item.id)};
  selection::ShotSet shots;
  switch (strategy) {
    case Strategy::fewshot_random:
      shots = selection::select_random(ctx.pool.items, classes, sel, item.id);
      break;
    case Strategy::fewshot_sparse:
      if (!ctx.tfidf) throw UsageError("fewshot-sparse needs a fitted TF-IDF model");
      sel.strategy = selection::Strategy::sparse;
      shots = selection::select_sparse(ctx.pool.items, ctx.pool.sparse, ctx.tfidf->transform(item.text), classes, sel,
                                       item.id);
      break;
    case Strategy::fewshot_dense: {
      sel.strategy = selection::Strategy::dense;
      vectorize::DenseVector query;
      if (ctx.query_dense) {
        if (auto it = ctx.query_dense->find(item.id); it != ctx.query_dense->end()) query = it->second;
      }
      if (query.values.empty()) {
        if (!ctx.embedder) throw UsageError("fewshot-dense needs an embedding client");
        query = ctx.embedder->embed_one(item.text);
      }
      shots = selection::select_dense(ctx.pool.items, ctx.pool.dense, query, classes, sel, item.id);
      break;
    }
    default:
      throw UsageError("classify_fewshot: not a few-shot strategy");
  }
  const auto prompt =
      prompting::build_prompt(ctx.prompt.tmpl, ctx.prompt.task, shots, item, prompting::Mode::fewshot, ctx.prompt.counter);
  ask_llm(r, item, prompt, shots, ctx.labels, llm);
  return r;
}

PredictionRecord classify_cicle(const LabeledText& item, const CicleContext& ctx, llm::LlmClient& llm) {
  const auto& labels = ctx.model.labels();
  PredictionRecord r;
  r.item_id = item.id;
  r.strategy = Strategy::cicle;
  r.gold_label = labels.index_of(item.label);
  const auto x = ctx.tfidf.transform(item.text);
  r.base_probs = ctx.model.predict_proba(x);
  r.conformal_set = conformal::predict_set(ctx.calibration, *r.base_probs);

  if (r.conformal_set->size() == 1) {
    r.bypassed = true;
    r.final_label = r.conformal_set->candidates.front().class_index;
    return r;
  }

  std::vector<std::string> classes;
  for (auto k : r.conformal_set->classes()) classes.push_back(labels.name(k));
  const selection::SelectionConfig sel{ctx.prompt.k, selection::Strategy::sparse, 0};
  const auto shots = selection::select_sparse(ctx.pool.items, ctx.pool.sparse, x, classes, sel, item.id);
  const auto prompt =
      prompting::build_prompt(ctx.prompt.tmpl, ctx.prompt.task, shots, item, prompting::Mode::cicle, ctx.prompt.counter);
  ask_llm(r, item, prompt, shots, labels, llm);
  return r;
}

void RunConfig::validate() const {
  if (datasets.empty()) throw UsageError("no datasets configured");
  if (sizes.empty()) throw UsageError("no sizes configured");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || (i > 0 && sizes[i] <= sizes[i - 1])) {
      throw UsageError("sizes must be positive and strictly ascending");
    }
  }
  if (strategies.empty()) throw UsageError("no strategies configured");
  conformal::ConformalConfig{alpha}.validate();
  selection::SelectionConfig{k}.validate();
  if (!(calib_fraction > 0.0 && calib_fraction < 1.0)) throw UsageError("calib_fraction must lie in (0, 1)");
  train.validate();
  prompt.tmpl.validate();
  if (jobs == 0) throw UsageError("jobs must be positive");
}

ordered_json RunConfig::to_json() const {
  ordered_json j;
  j["sizes"] = sizes;
  j["seed"] = seed;
  j["alpha"] = alpha;
  j["k"] = k;
  ordered_json strategy_names = ordered_json::array();
  for (auto s : strategies) strategy_names.push_back(to_string(s));
  j["strategies"] = strategy_names;
  j["calib_fraction"] = calib_fraction;
  j["template"] = prompt.tmpl.to_json();
  j["token_vocabulary"] = token_vocabulary;
  j["train"] = {{"C", train.C}, {"tol", train.tol}, {"max_iter", train.max_iter}};
  j["llm_endpoint"] = llm_endpoint;
  j["embedding_endpoint"] = embedding_endpoint;
  j["max_consecutive_failures"] = max_consecutive_failures;
  return j;
}

bool RunSummary::any_failed() const {
  return std::any_of(cells.begin(), cells.end(), [](const CellOutcome& c) { return c.status == CellStatus::failed; });
}

bool RunSummary::transport_failed() const {
  return std::any_of(cells.begin(), cells.end(), [](const CellOutcome& c) { return c.transport_failure; });
}

std::string record_file_name(std::string_view dataset, std::size_t size, std::uint64_t seed, Strategy strategy) {
  return std::string(dataset) + "_" + std::to_string(size) + "_" + std::to_string(seed) + "_" +
         std::string(to_string(strategy)) + ".jsonl";
}

std::vector<PredictionRecord> run_cell(const DatasetSpec& dataset, std::span<const LabeledText> pool,
                                       std::span<const LabeledText> test, std::size_t size, Strategy strategy,
                                       const RunConfig& config, RunServices services) {
  SizeWorkspace ws(dataset, pool, size, config);
  std::unordered_map<std::string, vectorize::DenseVector> queries;
  if (strategy == Strategy::fewshot_dense && services.embedder) queries = embed_queries(test, *services.embedder);
  return classify_cell(ws, dataset, test, strategy, config, services, &queries);
}

RunSummary run_experiment(const RunConfig& config, RunServices services) {
  config.validate();
  for (auto s : config.strategies) {
    if (uses_llm(s) && !services.llm) throw UsageError("strategy " + std::string(to_string(s)) + " needs an LLM endpoint or oracle");
    if (s == Strategy::fewshot_dense && !services.embedder) throw UsageError("fewshot-dense needs an embedding endpoint");
  }
  const auto records_dir = config.output_dir / "records";
  std::filesystem::create_directories(records_dir);

  RunSummary summary;
  ordered_json dataset_entries = ordered_json::array();
  for (const auto& dataset : config.datasets) {
    const auto pool = corpus::read_jsonl(dataset.pool_path);
    const auto test = corpus::read_jsonl(dataset.test_path);
    dataset_entries.push_back({{"name", dataset.name},
                               {"labels", dataset.labels.labels()},
                               {"min_size", dataset.min_size},
                               {"task", dataset.task},
                               {"pool_sha256", sha256_file(dataset.pool_path)},
                               {"test_sha256", sha256_file(dataset.test_path)}});
    std::optional<std::unordered_map<std::string, vectorize::DenseVector>> queries;

    for (auto size : config.sizes) {
      std::optional<SizeWorkspace> ws;
      for (auto strategy : config.strategies) {
        CellOutcome cell;
        cell.dataset = dataset.name;
        cell.size = size;
        cell.strategy = strategy;
        cell.file = std::filesystem::path("records") / record_file_name(dataset.name, size, config.seed, strategy);
        const auto path = config.output_dir / cell.file;
        if (size < dataset.min_size) {
          cell.status = CellStatus::skipped;
          cell.message = "size below dataset minimum " + std::to_string(dataset.min_size);
          spdlog::warn("{} size {}: skipped ({})", dataset.name, size, cell.message);
          summary.cells.push_back(std::move(cell));
          continue;
        }
        if (!config.force && std::filesystem::exists(path)) {
          cell.status = CellStatus::existing;
          summary.cells.push_back(std::move(cell));
          continue;
        }
        try {
          if (!ws) ws.emplace(dataset, pool, size, config);
          if (strategy == Strategy::fewshot_dense && !queries) queries = embed_queries(test, *services.embedder);
          auto records = classify_cell(*ws, dataset, test, strategy, config, services, queries ? &*queries : nullptr);
          write_records(path, records, dataset.labels);
          cell.status = CellStatus::written;
          cell.records = records.size();
        } catch (const TransportError& e) {
          cell.status = CellStatus::failed;
          cell.transport_failure = true;
          cell.message = e.what();
        } catch (const Error& e) {
          cell.status = CellStatus::failed;
          cell.message = e.what();
        }
        if (cell.status == CellStatus::failed) {
          spdlog::error("{} size {} {}: {}", dataset.name, size, to_string(strategy), cell.message);
        }
        summary.cells.push_back(std::move(cell));
      }
    }
  }

  ordered_json cells = ordered_json::array();
  for (const auto& c : summary.cells) {
    ordered_json entry{{"dataset", c.dataset},
                       {"size", c.size},
                       {"strategy", to_string(c.strategy)},
                       {"status", to_string(c.status)},
                       {"file", c.file.generic_string()}};
    const auto path = config.output_dir / c.file;
    if ((c.status == CellStatus::written || c.status == CellStatus::existing) && std::filesystem::exists(path)) {
      entry["sha256"] = sha256_file(path);
    }
    if (!c.message.empty()) entry["message"] = c.message;
    cells.push_back(std::move(entry));
  }
  ordered_json manifest{{"schema", "cicle-run/v1"}, {"config", config.to_json()}, {"datasets", dataset_entries}, {"cells", cells}};
  write_text_atomically(config.output_dir / "run_manifest.json", manifest.dump(2) + "\n");
  return summary;
}

}  // namespace cicle::pipeline
