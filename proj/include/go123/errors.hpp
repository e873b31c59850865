#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace go123 {

// Broad failure classes; the CLI maps them onto exit codes 2/3/4.
enum class ErrorCategory { Config, Model, Resource, Internal };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& what)
      : std::runtime_error(what), category_(category), code_(std::move(code)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& code() const noexcept { return code_; }

 private:
  ErrorCategory category_;
  std::string code_;
};

struct SourcePos {
  int line = 0;
  int column = 0;
  bool operator==(const SourcePos&) const = default;
};

class ModelError : public Error {
 public:
  ModelError(std::string code, const std::string& what, SourcePos pos = {})
      : Error(ErrorCategory::Model, std::move(code), what), pos_(pos) {}
  SourcePos pos() const noexcept { return pos_; }

 private:
  SourcePos pos_;
};

class SyntaxError : public ModelError {
 public:
  SyntaxError(const std::string& what, SourcePos pos, std::string expected)
      : ModelError("SyntaxError", what, pos), expected_(std::move(expected)) {}
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::string expected_;
};

#define GO123_MODEL_ERROR(Name)                                                 \
  class Name : public ModelError {                                              \
   public:                                                                      \
    explicit Name(const std::string& what, SourcePos pos = {})                  \
        : ModelError(#Name, what, pos) {}                                       \
  }

GO123_MODEL_ERROR(DuplicateName);
GO123_MODEL_ERROR(UnlabeledCommand);
GO123_MODEL_ERROR(UnboundParameter);
GO123_MODEL_ERROR(UnknownParameter);
GO123_MODEL_ERROR(EmptyDomain);
GO123_MODEL_ERROR(ProbabilityOutOfRange);
GO123_MODEL_ERROR(EvaluationError);

#undef GO123_MODEL_ERROR

class StateLimitExceeded : public Error {
 public:
  StateLimitExceeded(std::size_t limit, std::size_t frontier)
      : Error(ErrorCategory::Resource, "StateLimitExceeded",
              "state limit " + std::to_string(limit) + " exceeded (frontier size " +
                  std::to_string(frontier) + ")"),
        limit_(limit), frontier_(frontier) {}
  std::size_t limit() const noexcept { return limit_; }
  std::size_t frontier() const noexcept { return frontier_; }

 private:
  std::size_t limit_;
  std::size_t frontier_;
};

class RunLengthExceeded : public Error {
 public:
  explicit RunLengthExceeded(std::size_t max_len)
      : Error(ErrorCategory::Resource, "RunLengthExceeded",
              "simulation run exceeded " + std::to_string(max_len) + " steps") {}
};

class BudgetTooSmall : public Error {
 public:
  explicit BudgetTooSmall(const std::string& what)
      : Error(ErrorCategory::Resource, "BudgetTooSmall", what) {}
};

#define GO123_ERROR(Name, Category)                                            \
  class Name : public Error {                                                  \
   public:                                                                     \
    explicit Name(const std::string& what) : Error(Category, #Name, what) {}   \
  }

GO123_ERROR(ConfigError, ErrorCategory::Config);
GO123_ERROR(IoError, ErrorCategory::Config);
GO123_ERROR(MalformedCsv, ErrorCategory::Config);
GO123_ERROR(MalformedTree, ErrorCategory::Config);
GO123_ERROR(MalformedMdp, ErrorCategory::Config);
GO123_ERROR(SchemaConflict, ErrorCategory::Config);
GO123_ERROR(EmptyDataset, ErrorCategory::Model);
GO123_ERROR(MissingVariable, ErrorCategory::Model);
GO123_ERROR(EmptyActionSet, ErrorCategory::Internal);
GO123_ERROR(CannotRepair, ErrorCategory::Internal);

#undef GO123_ERROR

}  // namespace go123
