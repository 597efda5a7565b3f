#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace joingraph {

// Root of every error raised by the library. Each subclass corresponds to one
// failure class that callers (and the CLI exit-code mapping) distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;

  // Pipeline stage that raised the error, empty outside the pipeline.
  const std::string& stage() const noexcept { return stage_; }
  void set_stage(std::string stage) { stage_ = std::move(stage); }

 private:
  std::string stage_;
};

#define JOINGRAPH_DEFINE_ERROR(Name) \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

JOINGRAPH_DEFINE_ERROR(DuplicateColumn);
JOINGRAPH_DEFINE_ERROR(ShapeError);
JOINGRAPH_DEFINE_ERROR(RangeError);
JOINGRAPH_DEFINE_ERROR(InvalidStats);
JOINGRAPH_DEFINE_ERROR(InvalidEdge);
JOINGRAPH_DEFINE_ERROR(IoError);
JOINGRAPH_DEFINE_ERROR(IncompleteScores);
JOINGRAPH_DEFINE_ERROR(MaskViolation);
JOINGRAPH_DEFINE_ERROR(NumericalError);
JOINGRAPH_DEFINE_ERROR(EmptyMatrix);
JOINGRAPH_DEFINE_ERROR(EmptyInput);
JOINGRAPH_DEFINE_ERROR(ProtocolError);

#undef JOINGRAPH_DEFINE_ERROR

// Parse failure in an input document; carries the location when known.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line = 0, std::size_t offset = 0)
      : Error(line > 0 ? what + " (line " + std::to_string(line) + ", offset " +
                             std::to_string(offset) + ")"
                       : what),
        line_(line),
        offset_(offset) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t line_;
  std::size_t offset_;
};

// Raised when the semantic oracle cannot answer a batch after retries.
class OracleError : public Error {
 public:
  OracleError(const std::string& what, std::size_t batch_index = 0, std::size_t batch_size = 0)
      : Error(what), batch_index_(batch_index), batch_size_(batch_size) {}

  std::size_t batch_index() const noexcept { return batch_index_; }
  std::size_t batch_size() const noexcept { return batch_size_; }

 private:
  std::size_t batch_index_;
  std::size_t batch_size_;
};

}  // namespace joingraph
