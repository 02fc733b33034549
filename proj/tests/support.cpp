#include "support.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    auto candidate = fs::temp_directory_path() / ("cicle-test-" + std::to_string(rd()));
    if (fs::create_directory(candidate)) {
      path_ = candidate;
      return;
    }
  }
  throw std::runtime_error("cannot create temp dir");
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_text(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> topic_labels(std::size_t classes) {
  static const std::vector<std::string> names{"business", "health", "politics", "science", "sports", "travel"};
  if (classes > names.size()) throw std::invalid_argument("too many classes");
  return {names.begin(), names.begin() + static_cast<std::ptrdiff_t>(classes)};
}

std::vector<cicle::corpus::LabeledText> topic_corpus(std::size_t n, std::uint64_t seed, std::size_t classes,
                                                     std::size_t signal, std::size_t noise,
                                                     const std::string& id_prefix) {
  const auto labels = topic_labels(classes);
  const std::vector<std::string> filler{"the", "a", "today", "new", "report", "says", "after", "big", "of", "in"};
  std::mt19937_64 rng(seed);
  std::vector<cicle::corpus::LabeledText> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = rng() % classes;
    std::vector<std::string> tokens;
    for (std::size_t s = 0; s < signal; ++s) tokens.push_back(labels[c] + "kw" + std::to_string(rng() % 6));
    for (std::size_t s = 0; s < noise; ++s) tokens.push_back(labels[rng() % classes] + "kw" + std::to_string(rng() % 6));
    for (int f = 0; f < 4; ++f) tokens.push_back(filler[rng() % filler.size()]);
    std::shuffle(tokens.begin(), tokens.end(), rng);
    std::string text;
    for (const auto& t : tokens) text += (text.empty() ? "" : " ") + t;
    out.push_back({id_prefix + std::to_string(i), text, labels[c]});
  }
  return out;
}

}  // namespace testing
