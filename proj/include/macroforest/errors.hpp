#pragma once

#include <stdexcept>
#include <string>

namespace macroforest {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MACROFOREST_ERROR_TYPE(NAME)            \
  class NAME : public Error {                   \
   public:                                      \
    using Error::Error;                         \
  };

// panel ingestion / feature construction
MACROFOREST_ERROR_TYPE(MissingColumnError)
MACROFOREST_ERROR_TYPE(NonMonotoneDatesError)
MACROFOREST_ERROR_TYPE(NonPositiveIndexError)
MACROFOREST_ERROR_TYPE(GdpTooSparseError)
MACROFOREST_ERROR_TYPE(CsvFormatError)
MACROFOREST_ERROR_TYPE(InsufficientHistoryError)
MACROFOREST_ERROR_TYPE(EmptyDatasetError)

// filters
MACROFOREST_ERROR_TYPE(SeriesTooShortError)

// econometrics
MACROFOREST_ERROR_TYPE(LengthMismatchError)
MACROFOREST_ERROR_TYPE(DivisionByZeroError)

// interpretation
MACROFOREST_ERROR_TYPE(DegenerateFeatureError)

// orchestration / IO
MACROFOREST_ERROR_TYPE(IoError)
MACROFOREST_ERROR_TYPE(InvalidConfigError)

#undef MACROFOREST_ERROR_TYPE

class RankDeficientError : public Error {
 public:
  RankDeficientError(int column, const std::string& msg)
      : Error(msg), column_(column) {}
  int column() const { return column_; }

 private:
  int column_;
};

// Wraps a failure with the pipeline stage it happened in.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& msg)
      : Error("[" + stage + "] " + msg), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace macroforest
