#pragma once

#include <stdexcept>
#include <string>

namespace cetm {

// Every error carries a short machine-readable kind so the CLI can print
// "error: <kind>: <message>" on a single line.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct IngestError : Error {
  explicit IngestError(const std::string& what) : Error("ingest", what) {}
};

struct EmptyCorpusError : Error {
  explicit EmptyCorpusError(const std::string& what) : Error("empty-corpus", what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error("parse", what) {}
};

struct NumericError : Error {
  explicit NumericError(const std::string& what) : Error("numeric", what) {}
};

struct UndefinedWordError : Error {
  explicit UndefinedWordError(const std::string& what) : Error("undefined-word", what) {}
};

}  // namespace cetm
