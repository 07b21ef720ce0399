#include "melotok/error.h"

namespace melotok {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
      return "invalid_argument";
    case ErrorCode::kDomain:
      return "domain";
    case ErrorCode::kOutOfRange:
      return "out_of_range";
    case ErrorCode::kAlignment:
      return "alignment";
    case ErrorCode::kInsufficientData:
      return "insufficient_data";
    case ErrorCode::kFormat:
      return "format";
    case ErrorCode::kUnsupportedFormat:
      return "unsupported_format";
    case ErrorCode::kCorruption:
      return "corruption";
    case ErrorCode::kEncode:
      return "encode";
    case ErrorCode::kParse:
      return "parse";
    case ErrorCode::kIo:
      return "io";
    case ErrorCode::kTraining:
      return "training";
  }
  return "unknown";
}

}  // namespace melotok
