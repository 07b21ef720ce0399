#ifndef MELOTOK_ERROR_H_
#define MELOTOK_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace melotok {

enum class ErrorCode {
  kInvalidArgument,
  kDomain,
  kOutOfRange,
  kAlignment,
  kInsufficientData,
  kFormat,
  kUnsupportedFormat,
  kCorruption,
  kEncode,
  kParse,
  kIo,
  kTraining,
};

// Stable lower-case identifier, used by the CLI in its one-line error reports.
std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Score text errors carry the 1-based line they were raised on.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::kParse,
              "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Training diverged; `epoch` is the 1-based epoch that produced a non-finite
// loss.
class TrainingError : public Error {
 public:
  TrainingError(std::size_t epoch, const std::string& message)
      : Error(ErrorCode::kTraining,
              "epoch " + std::to_string(epoch) + ": " + message),
        epoch_(epoch) {}

  std::size_t epoch() const { return epoch_; }

 private:
  std::size_t epoch_;
};

}  // namespace melotok

#endif  // MELOTOK_ERROR_H_
