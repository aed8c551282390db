#include "longwrite/error.hpp"

namespace longwrite {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Layout: return "LayoutError";
    case ErrorKind::MalformedSource: return "MalformedSource";
    case ErrorKind::MissingArtifact: return "MissingArtifact";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::Dimension: return "DimError";
    case ErrorKind::DegenerateEmbedding: return "DegenerateEmbedding";
    case ErrorKind::Backend: return "BackendError";
    case ErrorKind::EmptyCompletion: return "EmptyCompletion";
    case ErrorKind::Budget: return "BudgetError";
    case ErrorKind::Plan: return "PlanError";
    case ErrorKind::JudgeFormat: return "JudgeFormatError";
    case ErrorKind::UnparseableReply: return "UnparseableReply";
    case ErrorKind::MissingField: return "MissingField";
    case ErrorKind::NonQuantizedScore: return "NonQuantizedScore";
    case ErrorKind::Cardinality: return "CardinalityError";
    case ErrorKind::DuplicateId: return "DuplicateIdError";
    case ErrorKind::IncompleteSet: return "IncompleteSet";
  }
  return "Error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 2;
    case ErrorKind::Io:
    case ErrorKind::Layout:
    case ErrorKind::MalformedSource:
      return 3;
    case ErrorKind::Backend:
    case ErrorKind::EmptyCompletion:
      return 4;
    case ErrorKind::Plan:
      return 5;
    case ErrorKind::JudgeFormat:
    case ErrorKind::UnparseableReply:
    case ErrorKind::MissingField:
    case ErrorKind::NonQuantizedScore:
    case ErrorKind::Cardinality:
    case ErrorKind::DuplicateId:
      return 6;
    case ErrorKind::MissingArtifact:
      return 7;
    case ErrorKind::Budget:
      return 8;
    case ErrorKind::EmptyInput:
    case ErrorKind::InvalidInput:
    case ErrorKind::Domain:
    case ErrorKind::Dimension:
    case ErrorKind::DegenerateEmbedding:
    case ErrorKind::IncompleteSet:
      return 9;
  }
  return 1;
}

}  // namespace longwrite
