#include "lexclass/error.hpp"

namespace lexclass {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::kParse: return "parse error";
        case ErrorCode::kInvalidArgument: return "invalid argument";
        case ErrorCode::kOutOfRange: return "label out of range";
        case ErrorCode::kDuplicate: return "duplicate";
        case ErrorCode::kNotFound: return "not found";
        case ErrorCode::kIo: return "i/o error";
        case ErrorCode::kEndpoint: return "endpoint error";
        case ErrorCode::kConfig: return "configuration error";
    }
    return "unknown";
}

}  // namespace lexclass
