#include "cicle/prompting.hpp"

#include <fstream>
#include <utility>

#include "cicle/error.hpp"

namespace cicle::prompting {
namespace {

std::size_t occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

// Single pass over the format string, so placeholder-like text inside the
// substituted values is never expanded.
std::string render(std::string_view fmt, std::initializer_list<std::pair<std::string_view, std::string_view>> values) {
  std::string out;
  out.reserve(fmt.size() + 64);
  std::size_t i = 0;
  while (i < fmt.size()) {
    bool replaced = false;
    if (fmt[i] == '{') {
      for (const auto& [name, value] : values) {
        if (fmt.compare(i + 1, name.size(), name) == 0 && i + 1 + name.size() < fmt.size() &&
            fmt[i + 1 + name.size()] == '}') {
          out.append(value);
          i += name.size() + 2;
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out.push_back(fmt[i++]);
  }
  return out;
}

void expect_count(std::string_view segment_name, std::string_view segment, std::string_view placeholder,
                  std::size_t expected) {
  if (occurrences(segment, placeholder) != expected) {
    throw UsageError("prompt template: " + std::string(segment_name) + " must contain " + std::string(placeholder) +
                     (expected == 1 ? " exactly once" : " zero times"));
  }
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

std::size_t utf8_char_len(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xE) return 3;
  if ((lead >> 3) == 0x1E) return 4;
  return 1;
}

}  // namespace

PromptTemplate PromptTemplate::defaults() {
  return {"Classify the text into one category of the following task: {task}.", "Text: {text}\nLabel: {label}",
          "Text: {text}\nLabel:", "Answer with only the label."};
}

PromptTemplate PromptTemplate::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw UsageError("prompt template must be a JSON object");
  PromptTemplate t;
  try {
    t.task_intro = j.at("task_intro").get<std::string>();
    t.example_format = j.at("example_format").get<std::string>();
    t.query_format = j.at("query_format").get<std::string>();
    t.instruction = j.at("instruction").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("prompt template: ") + e.what());
  }
  t.validate();
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open prompt template " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("prompt template " + path.string() + ": " + e.what());
  }
}

nlohmann::json PromptTemplate::to_json() const {
  return {{"task_intro", task_intro},
          {"example_format", example_format},
          {"query_format", query_format},
          {"instruction", instruction}};
}

void PromptTemplate::validate() const {
  expect_count("task_intro", task_intro, "{task}", 1);
  expect_count("task_intro", task_intro, "{text}", 0);
  expect_count("task_intro", task_intro, "{label}", 0);
  expect_count("example_format", example_format, "{text}", 1);
  expect_count("example_format", example_format, "{label}", 1);
  expect_count("query_format", query_format, "{text}", 1);
  expect_count("query_format", query_format, "{label}", 0);
  expect_count("instruction", instruction, "{text}", 0);
  expect_count("instruction", instruction, "{label}", 0);
  if (instruction.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw UsageError("prompt template: instruction must not be empty");
  }
}

TokenCounter TokenCounter::from_vocabulary(std::vector<std::string> tokens) {
  if (tokens.empty()) throw DataError("token vocabulary is empty");
  auto vocab = std::make_shared<Vocab>();
  for (auto& t : tokens) {
    vocab->max_len = std::max(vocab->max_len, t.size());
    vocab->tokens.insert(std::move(t));
  }
  TokenCounter counter;
  counter.vocab_ = std::move(vocab);
  return counter;
}

TokenCounter TokenCounter::from_vocabulary_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open token vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw DataError(path.string() + ":" + std::to_string(n) + ": empty vocabulary entry");
    for (unsigned char c : line) {
      if (is_space(c)) throw DataError(path.string() + ":" + std::to_string(n) + ": whitespace in vocabulary entry");
    }
    tokens.push_back(line);
  }
  return from_vocabulary(std::move(tokens));
}

std::size_t TokenCounter::count(std::string_view text) const {
  std::size_t total = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(static_cast<unsigned char>(text[i]))) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(static_cast<unsigned char>(text[i]))) ++i;
    if (i == start) continue;
    if (!vocab_) {
      ++total;
      continue;
    }
    std::string_view word = text.substr(start, i - start);
    std::size_t p = 0;
    while (p < word.size()) {
      std::size_t len = std::min(vocab_->max_len, word.size() - p);
      for (; len > 0; --len) {
        if (vocab_->tokens.count(std::string(word.substr(p, len)))) break;
      }
      if (len == 0) len = std::min(utf8_char_len(static_cast<unsigned char>(word[p])), word.size() - p);
      p += len;
      ++total;
    }
  }
  return total;
}

std::size_t count_tokens(std::string_view prompt, const TokenCounter& counter) { return counter.count(prompt); }

Prompt build_prompt(const PromptTemplate& tmpl, std::string_view task, const selection::ShotSet& shots,
                    const corpus::LabeledText& query, Mode mode, const TokenCounter& counter) {
  if (mode == Mode::fewshot && shots.shot_count() == 0) {
    throw DataError("few-shot prompt needs at least one example");
  }
  if (shots.per_class.empty()) throw DataError("prompt needs at least one candidate class");

  std::string text = render(tmpl.task_intro, {{"task", task}});
  for (const auto& cls : shots.per_class) {
    for (const auto& shot : cls.shots) {
      text += "\n\n";
      text += render(tmpl.example_format, {{"text", shot.text}, {"label", cls.label}});
    }
  }
  text += "\n\n";
  text += render(tmpl.query_format, {{"text", query.text}});
  text += "\n\n";
  text += tmpl.instruction;

  Prompt prompt{std::move(text), {}};
  prompt.stats.shot_count = shots.shot_count();
  prompt.stats.candidate_count = shots.class_count();
  prompt.stats.token_count = counter.count(prompt.text);
  return prompt;
}

}  // namespace cicle::prompting
