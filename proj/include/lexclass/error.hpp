#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lexclass {

enum class ErrorCode {
    kParse,          // malformed input file / record
    kInvalidArgument,
    kOutOfRange,     // label id outside the ontology
    kDuplicate,
    kNotFound,
    kIo,
    kEndpoint,       // HTTP / transport failures surfaced as exceptions
    kConfig,
};

std::string_view to_string(ErrorCode code);

/// Base exception for everything thrown by the library. The code lets callers
/// (notably the CLI) map failures onto exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace lexclass
