#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reflex {

enum class ErrorCode {
    InvalidArgument,
    EmptyAspects,
    MissingTemplate,
    VocabTooSmall,
    BadValueNames,
    UnknownSchema,
    SchemaMismatch,
    BackendUnavailable,
    EmptyMemory,
    InvalidPrompt,
    MissingAspect,
    OutOfRange,
    ShapeMismatch,
    NonPositiveBeta,
    EmptyStore,
    EmptyPrompt,
    NothingNeglected,
    SeqGap,
    DuplicateSeq,
    IoError,
    CorruptLog,
    SessionClosed,
    RoundInFlight,
    MissingTrajectory,
    ToolUnavailable,
    NotFound,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library surfaces as this exception; `code()` is the
/// machine-readable reason, `what()` carries "<Code>: <detail>".
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& detail);

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace reflex
