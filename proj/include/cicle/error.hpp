#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cicle {

// Base of every error the toolkit raises deliberately.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data: malformed files, violated preconditions on datasets.
class DataError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or command-line usage.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Remote service failure (LLM or embedding endpoint).
class TransportError : public Error {
 public:
  TransportError(const std::string& what, std::string item_id, int attempts, bool retriable)
      : Error(what), item_id_(std::move(item_id)), attempts_(attempts), retriable_(retriable) {}

  const std::string& item_id() const noexcept { return item_id_; }
  int attempts() const noexcept { return attempts_; }
  bool retriable() const noexcept { return retriable_; }

 private:
  std::string item_id_;
  int attempts_;
  bool retriable_;
};

}  // namespace cicle
