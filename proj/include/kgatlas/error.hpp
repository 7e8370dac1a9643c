#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgatlas {

enum class ErrorCode {
    Encoding,
    RowArity,
    BadField,
    AliasCollision,
    EmptyAlias,
    DuplicateLabel,
    DupPaperId,
    YearRange,
    InvalidTriplet,
    Backend,
    EmptyDocument,
    EmptyGroup,
    MixedGroup,
    MergeChain,
    MergeSelf,
    Config,
    DuplicateTriple,
    UnknownNode,
    MissingPosition,
    Io,
};

/// Stable identifier used in error messages, HTTP error bodies and CLI output,
/// e.g. "E_ROW_ARITY".
std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message);

    ErrorCode code() const noexcept { return code_; }
    std::string_view code_name() const noexcept { return error_code_name(code_); }
    /// The message without the code prefix.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

}  // namespace kgatlas
