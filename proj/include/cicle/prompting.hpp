#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <json.hpp>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "cicle/corpus.hpp"
#include "cicle/selection.hpp"

namespace cicle::prompting {

enum class Mode { fewshot, cicle };

// Segments are joined with blank lines: intro, examples, query, instruction.
struct PromptTemplate {
  std::string task_intro;      // contains {task}
  std::string example_format;  // contains {text} and {label}
  std::string query_format;    // contains {text}
  std::string instruction;     // label-only output demand

  static PromptTemplate defaults();
  // JSON object with exactly these four string fields.
  static PromptTemplate from_json(const nlohmann::json& j);
  static PromptTemplate load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  // Throws UsageError when a placeholder is missing, duplicated or misplaced.
  void validate() const;
};

struct PromptStats {
  std::size_t token_count = 0;
  std::size_t shot_count = 0;
  std::size_t candidate_count = 0;

  bool operator==(const PromptStats&) const = default;
};

// Pluggable token-count rule. The default counts maximal non-whitespace runs;
// a vocabulary-backed counter splits each run by greedy longest match against
// a subword list, charging one token per unmatched code point.
class TokenCounter {
 public:
  TokenCounter() = default;  // whitespace rule

  static TokenCounter whitespace() { return {}; }
  static TokenCounter from_vocabulary(std::vector<std::string> tokens);
  // One token per line; blank lines or embedded whitespace are malformed.
  static TokenCounter from_vocabulary_file(const std::filesystem::path& path);

  std::size_t count(std::string_view text) const;
  bool is_whitespace_rule() const noexcept { return vocab_ == nullptr; }

 private:
  struct Vocab {
    std::unordered_set<std::string> tokens;
    std::size_t max_len = 0;
  };
  std::shared_ptr<const Vocab> vocab_;
};

std::size_t count_tokens(std::string_view prompt, const TokenCounter& counter = {});

struct Prompt {
  std::string text;
  PromptStats stats;
};

// Fewshot mode requires a non-empty ShotSet. The ShotSet's class order is
// used as given (label order for baselines, descending probability for CICLe).
Prompt build_prompt(const PromptTemplate& tmpl, std::string_view task, const selection::ShotSet& shots,
                    const corpus::LabeledText& query, Mode mode, const TokenCounter& counter = {});

}  // namespace cicle::prompting
