#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cicle/corpus.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

// Topic-style corpus: each document mixes `signal` class keywords with shared
// filler and `noise` keywords of random other classes.
std::vector<cicle::corpus::LabeledText> topic_corpus(std::size_t n, std::uint64_t seed,
                                                     std::size_t classes = 4, std::size_t signal = 2,
                                                     std::size_t noise = 2, const std::string& id_prefix = "d");

std::vector<std::string> topic_labels(std::size_t classes = 4);

}  // namespace testing
