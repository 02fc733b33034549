#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cicle/pipeline.hpp"

namespace cicle::evalreport {

using pipeline::Strategy;

// Invalid predictions are nullopt. Per-class F1 is 0 when P+R=0; the mean runs
// over classes present in `golds`. Throws DataError on empty or unequal input.
double macro_f1(std::span<const std::optional<std::size_t>> preds, std::span<const std::size_t> golds,
                std::size_t num_classes);

struct CellKey {
  std::string dataset;
  std::size_t size = 0;
  Strategy strategy = Strategy::base;

  auto operator<=>(const CellKey&) const = default;
  bool operator==(const CellKey&) const = default;
};

std::string describe(const CellKey& key);

struct CellMetrics {
  std::size_t n_items = 0;
  double macro_f1 = 0.0;
  double mean_token_count = 0.0;  // LLM-free predictions count as 0
  double mean_shot_count = 0.0;
  double bypass_rate = 0.0;
  double invalid_rate = 0.0;
  std::optional<double> empirical_coverage;  // cicle cells only

  bool operator==(const CellMetrics&) const = default;
};

CellMetrics cell_metrics(std::span<const pipeline::PredictionRecord> records, std::size_t num_classes);

using CellTable = std::map<CellKey, CellMetrics>;
using StrategyMeans = std::map<Strategy, double>;

// Mean macro-F1 over `sizes` per strategy found for `dataset`. Throws
// DataError naming the first missing cell.
StrategyMeans aggregate_all_sizes(const CellTable& cells, const std::string& dataset,
                                  std::span<const std::size_t> sizes);

struct Regime {
  std::string name;
  std::size_t min_size = 0;  // inclusive
  std::size_t max_size = 0;  // inclusive

  bool operator==(const Regime&) const = default;
};

// low 100-400, medium 500-2000, large 3000-5000.
std::vector<Regime> default_regimes();

struct RegimeResult {
  Regime regime;
  StrategyMeans means;

  bool operator==(const RegimeResult&) const = default;
};

// Mean macro-F1 per strategy over every (dataset, size) cell that falls in a
// regime, restricted to `datasets`. Throws DataError when `sizes` are not
// partitioned by the regimes or a regime holds no cell.
std::vector<RegimeResult> regime_aggregate(const CellTable& cells, std::span<const Regime> regimes,
                                           std::span<const std::size_t> sizes,
                                           std::span<const std::string> datasets);

struct ReductionStats {
  double prompt_reduction_pct = 0.0;
  double shot_reduction_pct = 0.0;

  bool operator==(const ReductionStats&) const = default;
};

// 100 * (1 - cicle mean / mean of the three few-shot baseline means), where
// every mean runs over `sizes`. Throws DataError on a missing cell or a zero
// baseline mean.
ReductionStats reduction_stats(const CellTable& cells, const std::string& dataset,
                               std::span<const std::size_t> sizes);

struct RunReport {
  CellTable cells;
  std::map<std::string, StrategyMeans> aggregates;  // per dataset
  std::vector<RegimeResult> regimes;
  std::map<std::string, ReductionStats> reductions;  // per dataset

  nlohmann::ordered_json to_json() const;
  static RunReport from_json(const nlohmann::json& j);
  bool operator==(const RunReport&) const = default;
};

struct DatasetCells {
  std::string dataset;
  std::vector<std::size_t> sizes;  // sizes expected for this dataset
};

// Derives aggregates (all datasets), regimes (only over `regime_datasets`
// and only when every regime is populated) and reductions (datasets with
// all three baselines and cicle).
RunReport summarize(const CellTable& cells, std::span<const DatasetCells> datasets,
                    std::span<const std::string> regime_datasets, std::span<const Regime> regimes);

// Reads <output>/run_manifest.json and the record files it lists. Throws
// DataError listing every failed or missing cell. Empty `regime_datasets`
// means every dataset in the run.
RunReport build_report(const std::filesystem::path& output_dir, std::span<const std::string> regime_datasets = {});

enum class Format { csv, json, both };
Format parse_format(std::string_view name);

// Writes cells.csv, learning_curve.csv, aggregates.csv, regimes.csv and
// reductions.csv (csv) and/or report.json (json) into `dir`.
std::vector<std::filesystem::path> emit_report(const RunReport& report, const std::filesystem::path& dir, Format format);

}  // namespace cicle::evalreport
