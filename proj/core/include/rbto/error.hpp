#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace rbto {

enum class ErrorCode {
    InvalidParameter,
    SizeMismatch,
    StructuralSingularity,
    Numeric,
    Inconsistent,
    IllPosedFit,
    Infeasible,
    Config,
    Io,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-readable category next to the message.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

#define RBTO_REQUIRE(cond, code, msg)                                   \
    do {                                                                \
        if (!(cond)) throw ::rbto::Error((code), (msg));                \
    } while (0)

} // namespace rbto
