#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace circsim {

enum class ErrorCode {
    UnknownTerminal,
    NotSimulatable,
    Singular,
    NoConvergence,
    ParseError,
    SchemaError,
    UnknownSession,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every hard failure raised by the library. Soft
/// problems (sketch invariant violations) are reported as Diagnostics instead.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace circsim
