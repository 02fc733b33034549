#include "cicle/cli.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include "cicle/embedding.hpp"
#include "cicle/error.hpp"
#include "cicle/evalreport.hpp"
#include "cicle/hashing.hpp"
#include "cicle/llm_client.hpp"
#include "cicle/pipeline.hpp"

namespace cicle::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

const std::vector<std::size_t> kDefaultSizes{100, 200, 300, 400, 500, 1000, 2000, 3000, 4000, 5000};

void configure_logging(const std::string& level) {
  auto logger = spdlog::get("cicle");
  if (!logger) logger = spdlog::stderr_logger_mt("cicle");
  logger->set_pattern("%l: %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::from_str(level));
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

void check_name(const std::string& name) {
  if (name.empty()) throw UsageError("empty dataset name");
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    if (!ok) throw UsageError("dataset name may only use letters, digits, '_', '-' and '.': " + name);
  }
  if (name.front() == '.') throw UsageError("dataset name may not start with '.': " + name);
}

std::pair<std::string, std::string> split_assignment(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw UsageError("expected NAME=VALUE, got: " + s);
  return {s.substr(0, eq), s.substr(eq + 1)};
}

std::map<std::string, std::string> assignments(const std::vector<std::string>& items) {
  std::map<std::string, std::string> out;
  for (const auto& s : items) {
    auto [k, v] = split_assignment(s);
    check_name(k);
    if (!out.emplace(k, v).second) throw UsageError("duplicate entry for " + k);
  }
  return out;
}

bool is_goemotions(std::string name) {
  for (char& c : name) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return name == "goemotions";
}

// Config-file values fill options that were not given on the command line.
void apply_config(CLI::App& sub, const std::string& config_path, const std::set<std::string>& other_keys) {
  if (config_path.empty()) return;
  std::ifstream in(config_path);
  if (!in) throw UsageError("cannot open config file " + config_path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError("config file " + config_path + ": " + e.what());
  }
  if (!cfg.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [raw_key, value] : cfg.items()) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "config") continue;
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (!opt) {
      if (other_keys.contains(key)) continue;
      throw UsageError("unknown config key: " + raw_key);
    }
    if (opt->count() > 0) continue;
    std::vector<std::string> values;
    auto scalar = [&](const json& v) {
      if (v.is_string()) return v.get<std::string>();
      if (v.is_boolean()) return std::string(v.get<bool>() ? "true" : "false");
      if (v.is_number()) return v.dump();
      throw UsageError("config key " + raw_key + ": unsupported value " + v.dump());
    };
    if (value.is_array()) {
      for (const auto& v : value) values.push_back(scalar(v));
    } else {
      values.push_back(scalar(value));
    }
    try {
      opt->add_result(values);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError("config key " + raw_key + ": " + e.what());
    }
  }
}

std::set<std::string> option_keys(const CLI::App& app) {
  std::set<std::string> out;
  for (const auto* opt : app.get_options()) {
    if (!opt->get_lnames().empty()) out.insert(opt->get_lnames().front());
  }
  return out;
}

void write_json(const fs::path& path, const ordered_json& j) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp);
    out << j.dump(2) << '\n';
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---- prepare ---------------------------------------------------------------

struct PrepareArgs {
  std::vector<std::string> datasets;
  std::string format = "auto";
  std::size_t test_size = 1000;
  std::uint64_t test_seed = 20240;
  std::vector<std::size_t> sizes;
  std::vector<std::string> min_sizes;
  std::vector<std::string> tasks;
  std::string output;
};

int cmd_prepare(const PrepareArgs& a, bool sizes_given) {
  if (a.datasets.empty()) throw UsageError("prepare needs at least one --dataset NAME=PATH");
  if (a.output.empty()) throw UsageError("prepare needs --output");
  if (a.test_size == 0) throw UsageError("test size must be positive");
  const auto paths = assignments(a.datasets);
  std::map<std::string, std::size_t> min_sizes;
  for (const auto& [k, v] : assignments(a.min_sizes)) {
    try {
      min_sizes[k] = std::stoul(v);
    } catch (const std::exception&) {
      throw UsageError("bad minimum size for " + k + ": " + v);
    }
  }
  const auto tasks = assignments(a.tasks);
  for (const auto& [k, _] : min_sizes) {
    if (!paths.contains(k)) throw UsageError("--min-size names unknown dataset " + k);
  }
  for (const auto& [k, _] : tasks) {
    if (!paths.contains(k)) throw UsageError("--task names unknown dataset " + k);
  }

  for (const auto& [name, source] : paths) {
    const std::size_t min_size = min_sizes.contains(name) ? min_sizes[name] : (is_goemotions(name) ? 2000 : 0);
    if (sizes_given) {
      for (auto s : a.sizes) {
        if (s < min_size) {
          throw UsageError(name + ": size " + std::to_string(s) + " is below the dataset minimum of " +
                           std::to_string(min_size));
        }
      }
    }
    if (!fs::exists(source)) throw DataError("no such file: " + source);
    const auto format = a.format == "auto" ? corpus::format_from_path(source)
                                           : (a.format == "csv" ? corpus::Format::csv : corpus::Format::jsonl);
    const auto data = corpus::load_dataset(source, format);
    if (a.test_size >= data.items.size()) {
      throw DataError(name + ": test size " + std::to_string(a.test_size) + " leaves no pool (dataset has " +
                      std::to_string(data.items.size()) + " items)");
    }
    const auto test = corpus::stratified_subsample(data.items, a.test_size, a.test_seed);
    std::set<std::string> test_ids;
    for (const auto& t : test) test_ids.insert(t.id);
    std::vector<corpus::LabeledText> pool;
    for (const auto& item : data.items) {
      if (!test_ids.contains(item.id)) pool.push_back(item);
    }
    if (sizes_given) {
      for (auto s : a.sizes) {
        if (s > pool.size()) {
          throw DataError(name + ": size " + std::to_string(s) + " exceeds the pool of " + std::to_string(pool.size()));
        }
      }
    }

    const fs::path dir = fs::path(a.output) / "data" / name;
    fs::create_directories(dir);
    corpus::write_jsonl(dir / "test.jsonl", test);
    corpus::write_jsonl(dir / "pool.jsonl", pool);
    ordered_json manifest;
    manifest["schema"] = "cicle-prepare/v1";
    manifest["name"] = name;
    manifest["source"] = fs::path(source).filename().string();
    manifest["source_sha256"] = sha256_file(source);
    manifest["format"] = format == corpus::Format::csv ? "csv" : "jsonl";
    manifest["labels"] = data.labels.labels();
    manifest["min_size"] = min_size;
    manifest["task"] = tasks.contains(name) ? tasks.at(name) : name;
    manifest["test_seed"] = a.test_seed;
    manifest["test_size"] = test.size();
    manifest["pool_size"] = pool.size();
    manifest["sizes"] = sizes_given ? ordered_json(a.sizes) : ordered_json(nullptr);
    manifest["files"] = {{"test", {{"path", "test.jsonl"}, {"sha256", sha256_file(dir / "test.jsonl")}}},
                         {"pool", {{"path", "pool.jsonl"}, {"sha256", sha256_file(dir / "pool.jsonl")}}}};
    write_json(dir / "manifest.json", manifest);
    std::cout << name << "\ttest=" << test.size() << "\tpool=" << pool.size() << "\t" << (dir / "manifest.json").string()
              << "\n";
  }
  return ExitCode::ok;
}

// ---- run -------------------------------------------------------------------

struct RunArgs {
  std::string output;
  std::vector<std::string> datasets;
  std::vector<std::size_t> sizes = kDefaultSizes;
  std::uint64_t seed = 42;
  double alpha = 0.05;
  std::size_t k = 2;
  std::vector<std::string> strategies{"base", "fewshot-random", "fewshot-sparse", "fewshot-dense", "cicle"};
  double calib_fraction = 0.2;
  std::string template_path;
  std::string token_vocab;
  std::string oracle;
  std::string llm_endpoint;
  std::string model = "llama-3.1-8b-instruct";
  int max_new_tokens = 5;
  int timeout_ms = 60000;
  int max_retries = 3;
  int backoff_ms = 500;
  std::size_t concurrency = 4;
  double rps = 0.0;
  std::string api_key_env = "CICLE_API_KEY";
  std::string embedding_endpoint;
  std::size_t embedding_batch = 64;
  std::string embedding_cache;
  std::size_t jobs = 1;
  bool force = false;
  int max_consecutive_failures = 5;
  double C = 1.0;
  double tol = 1e-4;
  int max_iter = 1000;
};

pipeline::DatasetSpec load_prepared(const fs::path& output, const std::string& name) {
  check_name(name);
  const fs::path dir = output / "data" / name;
  const auto manifest = read_json(dir / "manifest.json");
  try {
    pipeline::DatasetSpec spec;
    spec.name = name;
    spec.pool_path = dir / manifest.at("files").at("pool").at("path").get<std::string>();
    spec.test_path = dir / manifest.at("files").at("test").at("path").get<std::string>();
    spec.labels = corpus::LabelSpace(manifest.at("labels").get<std::vector<std::string>>());
    spec.min_size = manifest.at("min_size").get<std::size_t>();
    spec.task = manifest.at("task").get<std::string>();
    if (sha256_file(spec.pool_path) != manifest["files"]["pool"].at("sha256").get<std::string>() ||
        sha256_file(spec.test_path) != manifest["files"]["test"].at("sha256").get<std::string>()) {
      throw DataError(name + ": prepared split files do not match their manifest");
    }
    return spec;
  } catch (const json::exception& e) {
    throw DataError((dir / "manifest.json").string() + ": " + e.what());
  }
}

std::vector<std::string> prepared_datasets(const fs::path& output) {
  std::vector<std::string> names;
  const auto root = output / "data";
  if (fs::is_directory(root)) {
    for (const auto& entry : fs::directory_iterator(root)) {
      if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) names.push_back(entry.path().filename().string());
    }
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) throw DataError("no prepared datasets under " + root.string() + "; run `cicle prepare` first");
  return names;
}

int cmd_run(const RunArgs& a) {
  if (a.output.empty()) throw UsageError("run needs --output");
  const fs::path output(a.output);

  pipeline::RunConfig config;
  config.sizes = a.sizes;
  config.seed = a.seed;
  config.alpha = a.alpha;
  config.k = a.k;
  config.strategies.clear();
  for (const auto& s : a.strategies) {
    const auto parsed = pipeline::parse_strategy(s);
    if (std::find(config.strategies.begin(), config.strategies.end(), parsed) != config.strategies.end()) {
      throw UsageError("strategy listed twice: " + s);
    }
    config.strategies.push_back(parsed);
  }
  config.calib_fraction = a.calib_fraction;
  if (!a.template_path.empty()) config.prompt.tmpl = prompting::PromptTemplate::load(a.template_path);
  if (!a.token_vocab.empty()) config.prompt.counter = prompting::TokenCounter::from_vocabulary_file(a.token_vocab);
  config.token_vocabulary = a.token_vocab.empty() ? "whitespace" : fs::path(a.token_vocab).filename().string();
  config.train.C = a.C;
  config.train.tol = a.tol;
  config.train.max_iter = a.max_iter;
  config.output_dir = output;
  config.jobs = a.jobs;
  config.force = a.force;
  config.max_consecutive_failures = a.max_consecutive_failures;
  for (const auto& name : a.datasets.empty() ? prepared_datasets(output) : a.datasets) {
    config.datasets.push_back(load_prepared(output, name));
  }
  config.validate();

  const bool needs_llm = std::any_of(config.strategies.begin(), config.strategies.end(), pipeline::uses_llm);
  const bool needs_embedder = std::find(config.strategies.begin(), config.strategies.end(),
                                        pipeline::Strategy::fewshot_dense) != config.strategies.end();

  std::unique_ptr<llm::LlmClient> llm;
  if (needs_llm) {
    if (!a.oracle.empty() && !a.llm_endpoint.empty()) throw UsageError("--oracle and --llm-endpoint are exclusive");
    if (a.oracle.empty() && a.llm_endpoint.empty()) {
      throw UsageError("LLM strategies need --llm-endpoint or --oracle");
    }
    llm::LlmConfig lc;
    lc.model_id = a.model;
    lc.max_new_tokens = a.max_new_tokens;
    lc.timeout = std::chrono::milliseconds(a.timeout_ms);
    lc.max_retries = a.max_retries;
    lc.backoff = std::chrono::milliseconds(a.backoff_ms);
    lc.concurrency_limit = a.concurrency;
    lc.requests_per_second = a.rps;
    lc.api_key_env = a.api_key_env;
    if (!a.oracle.empty()) {
      lc.endpoint = "oracle:" + a.oracle;
      llm = std::make_unique<llm::LlmClient>(lc, llm::make_oracle(a.oracle));
    } else {
      lc.endpoint = a.llm_endpoint;
      llm = std::make_unique<llm::LlmClient>(lc, llm::make_http_backend(lc));
    }
    config.llm_endpoint = lc.endpoint;
  }

  std::unique_ptr<vectorize::EmbeddingClient> embedder;
  if (needs_embedder) {
    if (a.embedding_endpoint.empty()) throw UsageError("fewshot-dense needs --embedding-endpoint");
    vectorize::EmbeddingConfig ec;
    ec.endpoint = a.embedding_endpoint;
    ec.service_id = a.embedding_endpoint;
    ec.max_batch = a.embedding_batch;
    ec.max_retries = a.max_retries;
    ec.timeout = std::chrono::milliseconds(a.timeout_ms);
    if (vectorize::is_hashing_embedding_spec(a.embedding_endpoint)) {
      embedder = std::make_unique<vectorize::EmbeddingClient>(
          ec, vectorize::make_hashing_embedding_transport(vectorize::parse_hashing_embedding_spec(a.embedding_endpoint)));
    } else {
      ec.cache_dir = a.embedding_cache.empty() ? output / "embedding_cache" : fs::path(a.embedding_cache);
      embedder = std::make_unique<vectorize::EmbeddingClient>(ec, vectorize::make_http_embedding_transport(ec));
    }
    config.embedding_endpoint = a.embedding_endpoint;
  }

  const auto summary = pipeline::run_experiment(config, {llm.get(), embedder.get()});
  std::vector<std::string> failures;
  for (const auto& c : summary.cells) {
    std::cout << c.dataset << '\t' << c.size << '\t' << pipeline::to_string(c.strategy) << '\t'
              << pipeline::to_string(c.status) << '\t' << c.records << '\n';
    if (c.status == pipeline::CellStatus::failed) {
      failures.push_back(c.dataset + "/" + std::to_string(c.size) + "/" + std::string(pipeline::to_string(c.strategy)) +
                         ": " + c.message);
    }
  }
  if (llm) spdlog::info("LLM completions: {}, attempts: {}", llm->completions(), llm->attempts());
  if (failures.empty()) return ExitCode::ok;
  std::string list;
  for (const auto& f : failures) list += (list.empty() ? "" : "; ") + f;
  const std::string what = std::to_string(failures.size()) + " cell(s) failed: " + list;
  if (summary.transport_failed()) throw TransportError(what, "", 0, false);
  throw DataError(what);
}

// ---- report ----------------------------------------------------------------

struct ReportArgs {
  std::string output;
  std::string format = "both";
  std::vector<std::string> regime_datasets;
  std::string report_dir;
};

int cmd_report(const ReportArgs& a) {
  if (a.output.empty()) throw UsageError("report needs --output");
  const auto format = evalreport::parse_format(a.format);
  const auto report = evalreport::build_report(a.output, a.regime_datasets);
  const fs::path dir = a.report_dir.empty() ? fs::path(a.output) / "report" : fs::path(a.report_dir);
  for (const auto& p : evalreport::emit_report(report, dir, format)) std::cout << p.string() << '\n';
  return ExitCode::ok;
}

int fail(std::string_view kind, const std::string& message, int code) {
  std::cerr << "error: " << kind << ": " << one_line(message) << std::endl;
  return code;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"CICLe: conformal in-context learning experiments", "cicle"};
  app.require_subcommand(1);
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}))
      ->capture_default_str();

  // prepare
  auto* prepare = app.add_subcommand("prepare", "Freeze the test split and shot pool of each dataset");
  PrepareArgs pa;
  std::string prepare_config;
  prepare->add_option("--config", prepare_config, "JSON file with option defaults (flags win)");
  prepare->add_option("--dataset", pa.datasets, "NAME=PATH of a JSONL or CSV source; repeatable");
  prepare->add_option("--format", pa.format, "Source format")
      ->check(CLI::IsMember({"auto", "jsonl", "csv"}))
      ->capture_default_str();
  prepare->add_option("--test-size", pa.test_size, "Items in the frozen test set")->capture_default_str();
  prepare->add_option("--test-seed", pa.test_seed, "Seed of the test-set draw")->capture_default_str();
  prepare->add_option("--sizes", pa.sizes, "Sizes to validate against the minimum and the pool")->delimiter(',');
  prepare->add_option("--min-size", pa.min_sizes, "NAME=N; smaller sizes are rejected (goemotions defaults to 2000)");
  prepare->add_option("--task", pa.tasks, "NAME=DESCRIPTION substituted for {task} in prompts");
  prepare->add_option("--output", pa.output, "Output directory; splits go to <output>/data/NAME");

  // run
  auto* runc = app.add_subcommand("run", "Run every (dataset, size, strategy) cell and write record files");
  RunArgs ra;
  std::string run_config;
  runc->add_option("--config", run_config, "JSON file with option defaults (flags win)");
  runc->add_option("--output", ra.output, "Output directory holding data/ from `prepare`; records go to records/");
  runc->add_option("--datasets", ra.datasets, "Prepared dataset names (default: all)")->delimiter(',');
  runc->add_option("--sizes", ra.sizes, "Ascending subsample sizes")->delimiter(',')->capture_default_str();
  runc->add_option("--seed", ra.seed, "Run seed")->capture_default_str();
  runc->add_option("--alpha", ra.alpha, "Conformal miscoverage level")->capture_default_str();
  runc->add_option("--k", ra.k, "Shots per class")->capture_default_str();
  runc->add_option("--strategies,--strategy", ra.strategies,
                   "base, fewshot-random, fewshot-sparse, fewshot-dense, cicle")
      ->delimiter(',')
      ->capture_default_str();
  runc->add_option("--calib-fraction", ra.calib_fraction, "Calibration share of each subsample")->capture_default_str();
  runc->add_option("--template", ra.template_path, "Prompt template JSON (default: built-in)");
  runc->add_option("--token-vocab", ra.token_vocab, "Tokenizer vocabulary file for prompt lengths (default: whitespace)");
  runc->add_option("--oracle", ra.oracle, "Mock LLM: perfect, majority, copy-last-shot or noisy:<acc>[:<seed>]");
  runc->add_option("--llm-endpoint", ra.llm_endpoint, "Chat-completions URL");
  runc->add_option("--model", ra.model, "Model id sent to the endpoint")->capture_default_str();
  runc->add_option("--max-new-tokens", ra.max_new_tokens, "Generation budget")->capture_default_str();
  runc->add_option("--timeout-ms", ra.timeout_ms, "Per-request timeout")->capture_default_str();
  runc->add_option("--max-retries", ra.max_retries, "Retries on transport errors and 5xx")->capture_default_str();
  runc->add_option("--backoff-ms", ra.backoff_ms, "Initial retry backoff, doubled per retry")->capture_default_str();
  runc->add_option("--concurrency", ra.concurrency, "Maximum LLM requests in flight")->capture_default_str();
  runc->add_option("--rps", ra.rps, "Requests per second limit (0 = unlimited)")->capture_default_str();
  runc->add_option("--api-key-env", ra.api_key_env, "Environment variable holding the API key")->capture_default_str();
  runc->add_option("--embedding-endpoint", ra.embedding_endpoint, "Embedding service URL, or hashing:<dim> offline");
  runc->add_option("--embedding-batch", ra.embedding_batch, "Texts per embedding request")->capture_default_str();
  runc->add_option("--embedding-cache", ra.embedding_cache, "Embedding cache dir (default: <output>/embedding_cache)");
  runc->add_option("--jobs", ra.jobs, "Worker threads per cell")->capture_default_str();
  runc->add_flag("--force", ra.force, "Recompute cells whose record file exists");
  runc->add_option("--max-consecutive-failures", ra.max_consecutive_failures,
                   "Abort a cell after this many failed LLM calls in a row (0 = never)")
      ->capture_default_str();
  runc->add_option("--C", ra.C, "Inverse L2 regularisation strength")->capture_default_str();
  runc->add_option("--tol", ra.tol, "Gradient tolerance of the classifier fit")->capture_default_str();
  runc->add_option("--max-iter", ra.max_iter, "Iteration cap of the classifier fit")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "Aggregate record files into CSV/JSON reports");
  ReportArgs rp;
  std::string report_config;
  report->add_option("--config", report_config, "JSON file with option defaults (flags win)");
  report->add_option("--output", rp.output, "Output directory of a finished run");
  report->add_option("--format", rp.format, "csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}))
      ->capture_default_str();
  report->add_option("--regime-datasets", rp.regime_datasets, "Datasets averaged into regimes (default: all)")
      ->delimiter(',');
  report->add_option("--report-dir", rp.report_dir, "Where reports go (default: <output>/report)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("usage", e.what(), ExitCode::usage);
  }
  configure_logging(log_level);

  try {
    std::set<std::string> all_keys;
    for (auto* sub : {prepare, runc, report}) {
      const auto keys = option_keys(*sub);
      all_keys.insert(keys.begin(), keys.end());
    }
    if (prepare->parsed()) {
      apply_config(*prepare, prepare_config, all_keys);
      const bool sizes_given = prepare->get_option("--sizes")->count() > 0;
      return cmd_prepare(pa, sizes_given);
    }
    if (runc->parsed()) {
      apply_config(*runc, run_config, all_keys);
      return cmd_run(ra);
    }
    apply_config(*report, report_config, all_keys);
    return cmd_report(rp);
  } catch (const UsageError& e) {
    return fail("usage", e.what(), ExitCode::usage);
  } catch (const TransportError& e) {
    return fail("transport", e.what(), ExitCode::transport);
  } catch (const DataError& e) {
    return fail("data", e.what(), ExitCode::data);
  } catch (const CLI::Error& e) {
    return fail("usage", e.what(), ExitCode::usage);
  } catch (const fs::filesystem_error& e) {
    return fail("data", e.what(), ExitCode::data);
  } catch (const Error& e) {
    return fail("data", e.what(), ExitCode::data);
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args);
}

}  // namespace cicle::cli
