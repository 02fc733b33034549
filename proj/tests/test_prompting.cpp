#include <doctest.h>

#include <random>

#include "cicle/error.hpp"
#include "cicle/prompting.hpp"
#include "support.hpp"

using namespace cicle;
using namespace cicle::prompting;
using corpus::LabeledText;

namespace {

selection::ShotSet shots_for(std::size_t classes, std::size_t k) {
  selection::ShotSet set;
  for (std::size_t c = 0; c < classes; ++c) {
    selection::ClassShots cs{"C" + std::to_string(c), {}};
    for (std::size_t i = 0; i < k; ++i) {
      cs.shots.push_back({"s" + std::to_string(c) + "_" + std::to_string(i), "example " + std::to_string(c * 10 + i), cs.label});
    }
    set.per_class.push_back(cs);
  }
  return set;
}

const LabeledText kQuery{"q", "what is this", "C1"};

}  // namespace

TEST_CASE("default template renders segments in order") {
  selection::ShotSet set;
  set.per_class.push_back({"Sports", {{"1", "goal scored", "Sports"}}});
  set.per_class.push_back({"World", {{"2", "treaty signed", "World"}}});
  const auto prompt = build_prompt(PromptTemplate::defaults(), "news topic", set, {"q", "market rally", "Business"},
                                   Mode::fewshot);
  CHECK(prompt.text ==
        "Classify the text into one category of the following task: news topic.\n\n"
        "Text: goal scored\nLabel: Sports\n\n"
        "Text: treaty signed\nLabel: World\n\n"
        "Text: market rally\nLabel:\n\n"
        "Answer with only the label.");
  CHECK(prompt.stats.shot_count == 2);
  CHECK(prompt.stats.candidate_count == 2);
  CHECK(prompt.stats.token_count == count_tokens(prompt.text));
}

TEST_CASE("4 classes x 2 shots: shot_count 8, candidate_count 4") {
  const auto prompt = build_prompt(PromptTemplate::defaults(), "t", shots_for(4, 2), kQuery, Mode::fewshot);
  CHECK(prompt.stats.shot_count == 8);
  CHECK(prompt.stats.candidate_count == 4);
}

TEST_CASE("identical inputs give byte-identical prompts") {
  const auto a = build_prompt(PromptTemplate::defaults(), "t", shots_for(3, 2), kQuery, Mode::cicle);
  const auto b = build_prompt(PromptTemplate::defaults(), "t", shots_for(3, 2), kQuery, Mode::cicle);
  CHECK(a.text == b.text);
  CHECK(a.stats == b.stats);
}

TEST_CASE("class order of the shot set is kept") {
  auto set = shots_for(3, 1);
  std::reverse(set.per_class.begin(), set.per_class.end());
  const auto prompt = build_prompt(PromptTemplate::defaults(), "t", set, kQuery, Mode::cicle);
  const auto p2 = prompt.text.find("Label: C2");
  const auto p1 = prompt.text.find("Label: C1");
  const auto p0 = prompt.text.find("Label: C0");
  CHECK(p2 < p1);
  CHECK(p1 < p0);
}

TEST_CASE("empty shot sets") {
  CHECK_THROWS_AS(build_prompt(PromptTemplate::defaults(), "t", shots_for(2, 0), kQuery, Mode::fewshot), DataError);
  CHECK_THROWS_AS(build_prompt(PromptTemplate::defaults(), "t", {}, kQuery, Mode::cicle), DataError);
  const auto prompt = build_prompt(PromptTemplate::defaults(), "t", shots_for(2, 0), kQuery, Mode::cicle);
  CHECK(prompt.stats.shot_count == 0);
  CHECK(prompt.stats.candidate_count == 2);
}

TEST_CASE("placeholders in shot text are not re-expanded") {
  selection::ShotSet set;
  set.per_class.push_back({"A", {{"1", "literal {label} and {text}", "A"}}});
  const auto prompt = build_prompt(PromptTemplate::defaults(), "{text}", set, {"q", "{task}", "A"}, Mode::fewshot);
  CHECK(prompt.text.find("Text: literal {label} and {text}\nLabel: A") != std::string::npos);
  CHECK(prompt.text.find("following task: {text}.") != std::string::npos);
  CHECK(prompt.text.find("Text: {task}\nLabel:") != std::string::npos);
}

TEST_CASE("template validation and json loading") {
  auto tmpl = PromptTemplate::defaults();
  CHECK_NOTHROW(tmpl.validate());
  tmpl.example_format = "Text: {text}";
  CHECK_THROWS_AS(tmpl.validate(), UsageError);
  tmpl = PromptTemplate::defaults();
  tmpl.query_format = "{text} {text}";
  CHECK_THROWS_AS(tmpl.validate(), UsageError);
  tmpl = PromptTemplate::defaults();
  tmpl.instruction = "";
  CHECK_THROWS_AS(tmpl.validate(), UsageError);

  testing::TempDir dir;
  auto custom = PromptTemplate::defaults();
  custom.task_intro = "Task: {task}";
  testing::write_text(dir / "t.json", custom.to_json().dump());
  CHECK(PromptTemplate::load(dir / "t.json").task_intro == "Task: {task}");
  testing::write_text(dir / "bad.json", R"({"task_intro":"no placeholder","example_format":"{text}{label}","query_format":"{text}","instruction":"x"})");
  CHECK_THROWS_AS(PromptTemplate::load(dir / "bad.json"), UsageError);
  CHECK_THROWS_AS(PromptTemplate::load(dir / "missing.json"), UsageError);
}

TEST_CASE("whitespace token counting") {
  CHECK(count_tokens("a b  c") == 3);
  CHECK(count_tokens("") == 0);
  CHECK(count_tokens(" \n\t ") == 0);
  CHECK(count_tokens("Label:\nSports") == 2);
}

TEST_CASE("whitespace counting is additive under concatenation") {
  std::mt19937_64 rng(3);
  const std::string alphabet = "ab \n\tc.";
  auto random_string = [&] {
    std::string s;
    for (std::size_t i = rng() % 20; i > 0; --i) s += alphabet[rng() % alphabet.size()];
    return s;
  };
  for (int t = 0; t < 500; ++t) {
    const auto p1 = random_string();
    const auto p2 = random_string();
    CHECK(count_tokens(p1 + " " + p2) == count_tokens(p1) + count_tokens(p2));
  }
}

TEST_CASE("vocabulary counting: greedy longest match") {
  const auto counter = TokenCounter::from_vocabulary({"un", "believ", "able", "unbeliev", "a"});
  CHECK_FALSE(counter.is_whitespace_rule());
  CHECK(counter.count("unbelievable") == 2);  // unbeliev + able
  CHECK(counter.count("xyz") == 3);           // unknown characters count one each
  CHECK(counter.count("able able") == 2);
  CHECK(counter.count("caf\xc3\xa9") == 4);   // c, a, f, e-acute
  CHECK(counter.count("") == 0);
}

TEST_CASE("vocabulary file loading") {
  testing::TempDir dir;
  testing::write_text(dir / "v.txt", "un\nbeliev\nable\n");
  CHECK(TokenCounter::from_vocabulary_file(dir / "v.txt").count("unbelievable") == 3);
  testing::write_text(dir / "blank.txt", "un\n\nable\n");
  CHECK_THROWS_AS(TokenCounter::from_vocabulary_file(dir / "blank.txt"), DataError);
  testing::write_text(dir / "space.txt", "un able\n");
  CHECK_THROWS_AS(TokenCounter::from_vocabulary_file(dir / "space.txt"), DataError);
  testing::write_text(dir / "empty.txt", "");
  CHECK_THROWS_AS(TokenCounter::from_vocabulary_file(dir / "empty.txt"), DataError);
  CHECK_THROWS_AS(TokenCounter::from_vocabulary_file(dir / "missing.txt"), DataError);
}
