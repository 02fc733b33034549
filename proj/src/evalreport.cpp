#include "cicle/evalreport.hpp"

#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <set>
#include <sstream>

#include "cicle/error.hpp"
#include "cicle/hashing.hpp"

namespace cicle::evalreport {
namespace {

using nlohmann::ordered_json;

const std::vector<Strategy>& fewshot_baselines() {
  static const std::vector<Strategy> s{Strategy::fewshot_random, Strategy::fewshot_sparse, Strategy::fewshot_dense};
  return s;
}

std::string num(double x) { return fmt::format("{}", x); }

const CellMetrics& require_cell(const CellTable& cells, const CellKey& key) {
  auto it = cells.find(key);
  if (it == cells.end()) throw DataError("missing cell " + describe(key));
  return it->second;
}

std::set<Strategy> strategies_of(const CellTable& cells, const std::string& dataset) {
  std::set<Strategy> out;
  for (const auto& [key, _] : cells) {
    if (key.dataset == dataset) out.insert(key.strategy);
  }
  return out;
}

ordered_json means_json(const StrategyMeans& means) {
  ordered_json j = ordered_json::object();
  for (const auto& [s, v] : means) j[std::string(pipeline::to_string(s))] = v;
  return j;
}

StrategyMeans means_from_json(const nlohmann::json& j) {
  StrategyMeans out;
  for (const auto& [name, v] : j.items()) out[pipeline::parse_strategy(name)] = v.get<double>();
  return out;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace

double macro_f1(std::span<const std::optional<std::size_t>> preds, std::span<const std::size_t> golds,
                std::size_t num_classes) {
  if (preds.empty()) throw DataError("macro_f1: empty input");
  if (preds.size() != golds.size()) throw DataError("macro_f1: predictions and golds differ in length");
  std::vector<std::size_t> tp(num_classes, 0), predicted(num_classes, 0), actual(num_classes, 0);
  for (std::size_t i = 0; i < golds.size(); ++i) {
    if (golds[i] >= num_classes) throw DataError("macro_f1: gold class index out of range");
    ++actual[golds[i]];
    if (!preds[i]) continue;
    if (*preds[i] >= num_classes) throw DataError("macro_f1: predicted class index out of range");
    ++predicted[*preds[i]];
    if (*preds[i] == golds[i]) ++tp[golds[i]];
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    if (actual[c] == 0) continue;
    ++present;
    // 2PR/(P+R) == 2TP/(predicted + actual)
    sum += 2.0 * static_cast<double>(tp[c]) / static_cast<double>(predicted[c] + actual[c]);
  }
  return sum / static_cast<double>(present);
}

std::string describe(const CellKey& key) {
  return key.dataset + "/" + std::to_string(key.size) + "/" + std::string(pipeline::to_string(key.strategy));
}

CellMetrics cell_metrics(std::span<const pipeline::PredictionRecord> records, std::size_t num_classes) {
  if (records.empty()) throw DataError("cell_metrics: no records");
  CellMetrics m;
  m.n_items = records.size();
  std::vector<std::optional<std::size_t>> preds;
  std::vector<std::size_t> golds;
  double tokens = 0.0, shots = 0.0;
  std::size_t bypassed = 0, invalid = 0, with_set = 0, covered = 0;
  for (const auto& r : records) {
    preds.push_back(r.final_label);
    golds.push_back(r.gold_label);
    if (r.prompt_stats) {
      tokens += static_cast<double>(r.prompt_stats->token_count);
      shots += static_cast<double>(r.prompt_stats->shot_count);
    }
    if (r.bypassed) ++bypassed;
    if (!r.final_label) ++invalid;
    if (r.conformal_set) {
      ++with_set;
      if (r.covered()) ++covered;
    }
  }
  const double n = static_cast<double>(records.size());
  m.macro_f1 = macro_f1(preds, golds, num_classes);
  m.mean_token_count = tokens / n;
  m.mean_shot_count = shots / n;
  m.bypass_rate = static_cast<double>(bypassed) / n;
  m.invalid_rate = static_cast<double>(invalid) / n;
  if (with_set == records.size()) m.empirical_coverage = static_cast<double>(covered) / n;
  return m;
}

StrategyMeans aggregate_all_sizes(const CellTable& cells, const std::string& dataset,
                                  std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw DataError("aggregate_all_sizes: no sizes");
  StrategyMeans out;
  for (auto s : strategies_of(cells, dataset)) {
    double sum = 0.0;
    for (auto size : sizes) sum += require_cell(cells, {dataset, size, s}).macro_f1;
    out[s] = sum / static_cast<double>(sizes.size());
  }
  if (out.empty()) throw DataError("aggregate_all_sizes: no cells for dataset " + dataset);
  return out;
}

std::vector<Regime> default_regimes() {
  return {{"low", 100, 400}, {"medium", 500, 2000}, {"large", 3000, 5000}};
}

std::vector<RegimeResult> regime_aggregate(const CellTable& cells, std::span<const Regime> regimes,
                                           std::span<const std::size_t> sizes,
                                           std::span<const std::string> datasets) {
  for (auto size : sizes) {
    const auto hits = std::count_if(regimes.begin(), regimes.end(),
                                    [&](const Regime& r) { return size >= r.min_size && size <= r.max_size; });
    if (hits != 1) {
      throw DataError("regimes do not partition the sizes: size " + std::to_string(size) + " falls in " +
                      std::to_string(hits) + " regimes");
    }
  }
  const std::set<std::string> allowed(datasets.begin(), datasets.end());
  const std::set<std::size_t> wanted(sizes.begin(), sizes.end());
  std::vector<RegimeResult> out;
  for (const auto& regime : regimes) {
    std::map<Strategy, std::pair<double, std::size_t>> acc;
    for (const auto& [key, m] : cells) {
      if (!allowed.contains(key.dataset) || !wanted.contains(key.size)) continue;
      if (key.size < regime.min_size || key.size > regime.max_size) continue;
      auto& [sum, count] = acc[key.strategy];
      sum += m.macro_f1;
      ++count;
    }
    if (acc.empty()) throw DataError("regime " + regime.name + " holds no cells");
    RegimeResult result{regime, {}};
    for (const auto& [s, sc] : acc) result.means[s] = sc.first / static_cast<double>(sc.second);
    out.push_back(std::move(result));
  }
  return out;
}

ReductionStats reduction_stats(const CellTable& cells, const std::string& dataset,
                               std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw DataError("reduction_stats: no sizes");
  auto mean_over_sizes = [&](Strategy s) {
    double tokens = 0.0, shots = 0.0;
    for (auto size : sizes) {
      const auto& m = require_cell(cells, {dataset, size, s});
      tokens += m.mean_token_count;
      shots += m.mean_shot_count;
    }
    const double n = static_cast<double>(sizes.size());
    return std::pair{tokens / n, shots / n};
  };
  double base_tokens = 0.0, base_shots = 0.0;
  for (auto s : fewshot_baselines()) {
    const auto [t, sh] = mean_over_sizes(s);
    base_tokens += t / 3.0;
    base_shots += sh / 3.0;
  }
  if (base_tokens == 0.0 || base_shots == 0.0) throw DataError("reduction_stats: zero baseline mean for " + dataset);
  const auto [cicle_tokens, cicle_shots] = mean_over_sizes(Strategy::cicle);
  return {100.0 * (1.0 - cicle_tokens / base_tokens), 100.0 * (1.0 - cicle_shots / base_shots)};
}

RunReport summarize(const CellTable& cells, std::span<const DatasetCells> datasets,
                    std::span<const std::string> regime_datasets, std::span<const Regime> regimes) {
  RunReport report;
  report.cells = cells;
  std::set<std::size_t> regime_sizes;
  const std::set<std::string> allowed(regime_datasets.begin(), regime_datasets.end());
  for (const auto& d : datasets) {
    if (d.sizes.empty()) continue;
    report.aggregates[d.dataset] = aggregate_all_sizes(cells, d.dataset, d.sizes);
    const auto present = strategies_of(cells, d.dataset);
    const bool has_all = present.contains(Strategy::cicle) &&
                         std::all_of(fewshot_baselines().begin(), fewshot_baselines().end(),
                                     [&](Strategy s) { return present.contains(s); });
    if (has_all) report.reductions[d.dataset] = reduction_stats(cells, d.dataset, d.sizes);
    if (allowed.contains(d.dataset)) regime_sizes.insert(d.sizes.begin(), d.sizes.end());
  }
  const std::vector<std::size_t> sizes(regime_sizes.begin(), regime_sizes.end());
  const bool populated = !sizes.empty() && std::all_of(regimes.begin(), regimes.end(), [&](const Regime& r) {
    return std::any_of(sizes.begin(), sizes.end(), [&](auto s) { return s >= r.min_size && s <= r.max_size; });
  });
  if (populated) {
    try {
      report.regimes = regime_aggregate(cells, regimes, sizes, regime_datasets);
    } catch (const DataError& e) {
      spdlog::warn("regimes omitted: {}", e.what());
    }
  } else {
    spdlog::info("regimes omitted: the configured sizes do not populate every regime");
  }
  return report;
}

ordered_json RunReport::to_json() const {
  ordered_json j;
  j["schema"] = "cicle-report/v1";
  ordered_json cell_rows = ordered_json::array();
  for (const auto& [key, m] : cells) {
    cell_rows.push_back({{"dataset", key.dataset},
                         {"size", key.size},
                         {"strategy", pipeline::to_string(key.strategy)},
                         {"n_items", m.n_items},
                         {"macro_f1", m.macro_f1},
                         {"mean_token_count", m.mean_token_count},
                         {"mean_shot_count", m.mean_shot_count},
                         {"bypass_rate", m.bypass_rate},
                         {"invalid_rate", m.invalid_rate},
                         {"empirical_coverage", m.empirical_coverage ? ordered_json(*m.empirical_coverage)
                                                                     : ordered_json(nullptr)}});
  }
  j["cells"] = cell_rows;
  ordered_json agg = ordered_json::object();
  for (const auto& [dataset, means] : aggregates) agg[dataset] = means_json(means);
  j["aggregates"] = agg;
  ordered_json reg = ordered_json::array();
  for (const auto& r : regimes) {
    reg.push_back({{"name", r.regime.name},
                   {"min_size", r.regime.min_size},
                   {"max_size", r.regime.max_size},
                   {"means", means_json(r.means)}});
  }
  j["regimes"] = reg;
  ordered_json red = ordered_json::object();
  for (const auto& [dataset, r] : reductions) {
    red[dataset] = {{"prompt_reduction_pct", r.prompt_reduction_pct}, {"shot_reduction_pct", r.shot_reduction_pct}};
  }
  j["reductions"] = red;
  return j;
}

RunReport RunReport::from_json(const nlohmann::json& j) {
  try {
    if (j.at("schema") != "cicle-report/v1") throw DataError("unsupported report schema");
    RunReport report;
    for (const auto& row : j.at("cells")) {
      CellKey key{row.at("dataset").get<std::string>(), row.at("size").get<std::size_t>(),
                  pipeline::parse_strategy(row.at("strategy").get<std::string>())};
      CellMetrics m;
      m.n_items = row.at("n_items").get<std::size_t>();
      m.macro_f1 = row.at("macro_f1").get<double>();
      m.mean_token_count = row.at("mean_token_count").get<double>();
      m.mean_shot_count = row.at("mean_shot_count").get<double>();
      m.bypass_rate = row.at("bypass_rate").get<double>();
      m.invalid_rate = row.at("invalid_rate").get<double>();
      if (!row.at("empirical_coverage").is_null()) m.empirical_coverage = row["empirical_coverage"].get<double>();
      report.cells.emplace(std::move(key), m);
    }
    for (const auto& [dataset, means] : j.at("aggregates").items()) report.aggregates[dataset] = means_from_json(means);
    for (const auto& r : j.at("regimes")) {
      report.regimes.push_back({{r.at("name").get<std::string>(), r.at("min_size").get<std::size_t>(),
                                 r.at("max_size").get<std::size_t>()},
                                means_from_json(r.at("means"))});
    }
    for (const auto& [dataset, r] : j.at("reductions").items()) {
      report.reductions[dataset] = {r.at("prompt_reduction_pct").get<double>(), r.at("shot_reduction_pct").get<double>()};
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

RunReport build_report(const std::filesystem::path& output_dir, std::span<const std::string> regime_datasets) {
  const auto manifest_path = output_dir / "run_manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw DataError("cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  if (manifest.value("schema", "") != "cicle-run/v1") throw DataError(manifest_path.string() + ": unsupported schema");

  std::map<CellKey, nlohmann::json> entries;
  for (const auto& c : manifest.at("cells")) {
    entries[{c.at("dataset").get<std::string>(), c.at("size").get<std::size_t>(),
             pipeline::parse_strategy(c.at("strategy").get<std::string>())}] = c;
  }
  const auto sizes = manifest.at("config").at("sizes").get<std::vector<std::size_t>>();
  std::vector<Strategy> strategies;
  for (const auto& s : manifest.at("config").at("strategies")) strategies.push_back(pipeline::parse_strategy(s.get<std::string>()));

  CellTable cells;
  std::vector<DatasetCells> datasets;
  std::vector<std::string> all_names;
  std::vector<std::string> missing;
  for (const auto& d : manifest.at("datasets")) {
    DatasetCells dc{d.at("name").get<std::string>(), {}};
    all_names.push_back(dc.dataset);
    const corpus::LabelSpace labels(d.at("labels").get<std::vector<std::string>>());
    const auto min_size = d.at("min_size").get<std::size_t>();
    for (auto size : sizes) {
      if (size < min_size) continue;
      dc.sizes.push_back(size);
      for (auto s : strategies) {
        const CellKey key{dc.dataset, size, s};
        auto it = entries.find(key);
        if (it == entries.end()) {
          missing.push_back(describe(key) + " (not in manifest)");
          continue;
        }
        const auto status = it->second.at("status").get<std::string>();
        const auto path = output_dir / it->second.at("file").get<std::string>();
        if ((status != "written" && status != "existing") || !std::filesystem::exists(path)) {
          missing.push_back(describe(key) + " (" + status + ")");
          continue;
        }
        if (it->second.contains("sha256") && sha256_file(path) != it->second["sha256"].get<std::string>()) {
          missing.push_back(describe(key) + " (record file changed since the run)");
          continue;
        }
        cells[key] = cell_metrics(pipeline::read_records(path, labels), labels.size());
      }
    }
    datasets.push_back(std::move(dc));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : "; ") + m;
    throw DataError("missing cells: " + list);
  }
  const std::vector<std::string> regime_names =
      regime_datasets.empty() ? all_names : std::vector<std::string>(regime_datasets.begin(), regime_datasets.end());
  const auto regimes = default_regimes();
  return summarize(cells, datasets, regime_names, regimes);
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::csv;
  if (name == "json") return Format::json;
  if (name == "both") return Format::both;
  throw UsageError("unknown report format: " + std::string(name));
}

std::vector<std::filesystem::path> emit_report(const RunReport& report, const std::filesystem::path& dir, Format format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    written.push_back(dir / name);
  };

  if (format != Format::json) {
    std::ostringstream cells;
    cells << "dataset,size,strategy,n_items,macro_f1,mean_token_count,mean_shot_count,bypass_rate,invalid_rate,"
             "empirical_coverage\n";
    std::ostringstream curve;
    curve << "dataset,strategy,size,macro_f1\n";
    std::map<std::tuple<std::string, Strategy, std::size_t>, double> curve_rows;
    for (const auto& [key, m] : report.cells) {
      cells << key.dataset << ',' << key.size << ',' << pipeline::to_string(key.strategy) << ',' << m.n_items << ','
            << num(m.macro_f1) << ',' << num(m.mean_token_count) << ',' << num(m.mean_shot_count) << ','
            << num(m.bypass_rate) << ',' << num(m.invalid_rate) << ','
            << (m.empirical_coverage ? num(*m.empirical_coverage) : "") << '\n';
      curve_rows[{key.dataset, key.strategy, key.size}] = m.macro_f1;
    }
    for (const auto& [k, f1] : curve_rows) {
      curve << std::get<0>(k) << ',' << pipeline::to_string(std::get<1>(k)) << ',' << std::get<2>(k) << ',' << num(f1)
            << '\n';
    }
    std::ostringstream agg;
    agg << "dataset,strategy,mean_macro_f1\n";
    for (const auto& [dataset, means] : report.aggregates) {
      for (const auto& [s, v] : means) agg << dataset << ',' << pipeline::to_string(s) << ',' << num(v) << '\n';
    }
    std::ostringstream reg;
    reg << "regime,min_size,max_size,strategy,mean_macro_f1\n";
    for (const auto& r : report.regimes) {
      for (const auto& [s, v] : r.means) {
        reg << r.regime.name << ',' << r.regime.min_size << ',' << r.regime.max_size << ',' << pipeline::to_string(s)
            << ',' << num(v) << '\n';
      }
    }
    std::ostringstream red;
    red << "dataset,prompt_reduction_pct,shot_reduction_pct\n";
    for (const auto& [dataset, r] : report.reductions) {
      red << dataset << ',' << num(r.prompt_reduction_pct) << ',' << num(r.shot_reduction_pct) << '\n';
    }
    emit("cells.csv", cells.str());
    emit("learning_curve.csv", curve.str());
    emit("aggregates.csv", agg.str());
    emit("regimes.csv", reg.str());
    emit("reductions.csv", red.str());
  }
  if (format != Format::csv) emit("report.json", report.to_json().dump(2) + "\n");
  return written;
}

}  // namespace cicle::evalreport
