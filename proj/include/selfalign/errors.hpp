#ifndef SELFALIGN_ERRORS_HPP_
#define SELFALIGN_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace selfalign {

// Categories map one-to-one onto CLI exit codes (usage=1, data=2, numeric=3).
enum class ErrorCategory { kUsage = 1, kData = 2, kNumeric = 3 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class MalformedLine : public Error {
 public:
  MalformedLine(const std::string& path, std::size_t line, const std::string& reason)
      : Error(ErrorCategory::kData,
              "MalformedLine: " + path + ":" + std::to_string(line) + ": " + reason),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyFile : public Error {
 public:
  explicit EmptyFile(const std::string& path)
      : Error(ErrorCategory::kData, "EmptyFile: no valid records in " + path) {}
};

class EmptyGoldSet : public Error {
 public:
  EmptyGoldSet(const std::string& path, std::size_t line)
      : Error(ErrorCategory::kData,
              "EmptyGoldSet: " + path + ":" + std::to_string(line) + ": mention has no gold concept"),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnknownConcept : public Error {
 public:
  UnknownConcept(std::size_t mention_index, const std::string& cui)
      : Error(ErrorCategory::kData, "UnknownConcept: mention " + std::to_string(mention_index) +
                                        " has gold concept '" + cui + "' absent from the dictionary"),
        mention_index_(mention_index) {}
  std::size_t mention_index() const { return mention_index_; }

 private:
  std::size_t mention_index_;
};

class EmptyPairList : public Error {
 public:
  EmptyPairList() : Error(ErrorCategory::kData, "EmptyPairList: no positive pairs to train on") {}
};

class EmptyMentionSet : public Error {
 public:
  EmptyMentionSet() : Error(ErrorCategory::kData, "EmptyMentionSet: nothing to evaluate") {}
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(ErrorCategory::kData, "IoError: " + path + ": " + what) {}
};

class ZeroVector : public Error {
 public:
  explicit ZeroVector(const std::string& detail)
      : Error(ErrorCategory::kNumeric, "ZeroVector: " + detail), detail_(detail) {}
  const std::string& detail() const { return detail_; }

 private:
  std::string detail_;
};

class NonFiniteGradient : public Error {
 public:
  explicit NonFiniteGradient(std::size_t iteration)
      : Error(ErrorCategory::kNumeric,
              "NonFiniteGradient: non-finite gradient at iteration " + std::to_string(iteration)),
        iteration_(iteration) {}
  std::size_t iteration() const { return iteration_; }

 private:
  std::size_t iteration_;
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& detail)
      : Error(ErrorCategory::kNumeric, "ShapeMismatch: " + detail) {}
};

class UnknownLossKind : public Error {
 public:
  explicit UnknownLossKind(const std::string& kind)
      : Error(ErrorCategory::kUsage, "UnknownLossKind: '" + kind + "'") {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& detail)
      : Error(ErrorCategory::kUsage, "ConfigError: " + detail) {}
};

}  // namespace selfalign

#endif  // SELFALIGN_ERRORS_HPP_
