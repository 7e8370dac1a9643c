#include "kgatlas/error.hpp"

namespace kgatlas {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Encoding: return "E_ENCODING";
        case ErrorCode::RowArity: return "E_ROW_ARITY";
        case ErrorCode::BadField: return "E_BAD_FIELD";
        case ErrorCode::AliasCollision: return "E_ALIAS_COLLISION";
        case ErrorCode::EmptyAlias: return "E_EMPTY_ALIAS";
        case ErrorCode::DuplicateLabel: return "E_DUPLICATE_LABEL";
        case ErrorCode::DupPaperId: return "E_DUP_PAPER_ID";
        case ErrorCode::YearRange: return "E_YEAR_RANGE";
        case ErrorCode::InvalidTriplet: return "E_INVALID_TRIPLET";
        case ErrorCode::Backend: return "E_BACKEND";
        case ErrorCode::EmptyDocument: return "E_EMPTY_DOC";
        case ErrorCode::EmptyGroup: return "E_EMPTY_GROUP";
        case ErrorCode::MixedGroup: return "E_MIXED_GROUP";
        case ErrorCode::MergeChain: return "E_MERGE_CHAIN";
        case ErrorCode::MergeSelf: return "E_MERGE_SELF";
        case ErrorCode::Config: return "E_CONFIG";
        case ErrorCode::DuplicateTriple: return "E_DUPLICATE_TRIPLE";
        case ErrorCode::UnknownNode: return "E_UNKNOWN_NODE";
        case ErrorCode::MissingPosition: return "E_MISSING_POSITION";
        case ErrorCode::Io: return "E_IO";
    }
    return "E_UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code), message_(message) {}

}  // namespace kgatlas
