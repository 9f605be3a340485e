#include "reflex/core/error.hpp"

namespace reflex {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::EmptyAspects: return "EmptyAspects";
    case ErrorCode::MissingTemplate: return "MissingTemplate";
    case ErrorCode::VocabTooSmall: return "VocabTooSmall";
    case ErrorCode::BadValueNames: return "BadValueNames";
    case ErrorCode::UnknownSchema: return "UnknownSchema";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::BackendUnavailable: return "BackendUnavailable";
    case ErrorCode::EmptyMemory: return "EmptyMemory";
    case ErrorCode::InvalidPrompt: return "InvalidPrompt";
    case ErrorCode::MissingAspect: return "MissingAspect";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonPositiveBeta: return "NonPositiveBeta";
    case ErrorCode::EmptyStore: return "EmptyStore";
    case ErrorCode::EmptyPrompt: return "EmptyPrompt";
    case ErrorCode::NothingNeglected: return "NothingNeglected";
    case ErrorCode::SeqGap: return "SeqGap";
    case ErrorCode::DuplicateSeq: return "DuplicateSeq";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::SessionClosed: return "SessionClosed";
    case ErrorCode::RoundInFlight: return "RoundInFlight";
    case ErrorCode::MissingTrajectory: return "MissingTrajectory";
    case ErrorCode::ToolUnavailable: return "ToolUnavailable";
    case ErrorCode::NotFound: return "NotFound";
    }
    return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

} // namespace reflex
