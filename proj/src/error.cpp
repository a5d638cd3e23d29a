#include "lkg/error.hpp"

namespace lkg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::MalformedMarkup: return "MalformedMarkup";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::MalformedOutput: return "MalformedOutput";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::OracleMissing: return "OracleMissing";
    case ErrorCode::LabelMismatch: return "LabelMismatch";
    case ErrorCode::UnknownEndpoint: return "UnknownEndpoint";
    case ErrorCode::CrossDocumentEdge: return "CrossDocumentEdge";
    case ErrorCode::ExtendedKindDisabled: return "ExtendedKindDisabled";
    case ErrorCode::GraphFrozen: return "GraphFrozen";
    case ErrorCode::GraphNotFrozen: return "GraphNotFrozen";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::WrongLabel: return "WrongLabel";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyText: return "EmptyText";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::StaleIndex: return "StaleIndex";
    case ErrorCode::ResourceMissing: return "ResourceMissing";
    case ErrorCode::UnknownQuery: return "UnknownQuery";
    case ErrorCode::DocumentMismatch: return "DocumentMismatch";
    case ErrorCode::InvalidFormat: return "InvalidFormat";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace lkg
