#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace longwrite {

enum class ErrorKind {
  Config,
  Io,
  Layout,
  MalformedSource,
  MissingArtifact,
  EmptyInput,
  InvalidInput,
  Domain,
  Dimension,
  DegenerateEmbedding,
  Backend,
  EmptyCompletion,
  Budget,
  Plan,
  JudgeFormat,
  UnparseableReply,
  MissingField,
  NonQuantizedScore,
  Cardinality,
  DuplicateId,
  IncompleteSet,
};

std::string_view to_string(ErrorKind kind);

/// Process exit code for an error family. 0 is reserved for success and 1 for
/// unexpected failures that are not longwrite errors.
int exit_code_for(ErrorKind kind);

class Error : public std::exception {
 public:
  Error(ErrorKind kind, std::string message) : kind_(kind), message_(std::move(message)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const char* what() const noexcept override { return message_.c_str(); }

  /// Prefixes the message with call-site context, e.g. "step 3: ".
  void add_context(std::string_view context) {
    message_ = std::string(context) + ": " + message_;
  }

 private:
  ErrorKind kind_;
  std::string message_;
};

template <ErrorKind K>
class TypedError : public Error {
 public:
  explicit TypedError(std::string message) : Error(K, std::move(message)) {}
};

using ConfigError = TypedError<ErrorKind::Config>;
using IoError = TypedError<ErrorKind::Io>;
using LayoutError = TypedError<ErrorKind::Layout>;
using MalformedSource = TypedError<ErrorKind::MalformedSource>;
using MissingArtifact = TypedError<ErrorKind::MissingArtifact>;
using EmptyInput = TypedError<ErrorKind::EmptyInput>;
using InvalidInput = TypedError<ErrorKind::InvalidInput>;
using DomainError = TypedError<ErrorKind::Domain>;
using DimError = TypedError<ErrorKind::Dimension>;
using DegenerateEmbedding = TypedError<ErrorKind::DegenerateEmbedding>;
using EmptyCompletion = TypedError<ErrorKind::EmptyCompletion>;
using BudgetError = TypedError<ErrorKind::Budget>;
using IncompleteSet = TypedError<ErrorKind::IncompleteSet>;

class BackendError : public Error {
 public:
  BackendError(std::string message, bool transient = false)
      : Error(ErrorKind::Backend, std::move(message)), transient_(transient) {}

  /// Transient failures (transport errors, 429, 5xx) are retried by the gateway.
  bool transient() const noexcept { return transient_; }

 private:
  bool transient_;
};

class PlanError : public Error {
 public:
  PlanError(std::string message, std::string raw_output)
      : Error(ErrorKind::Plan, std::move(message)), raw_output_(std::move(raw_output)) {}

  const std::string& raw_output() const noexcept { return raw_output_; }

 private:
  std::string raw_output_;
};

/// Base of all judge-reply validation failures; always carries the raw reply.
class JudgeFormatError : public Error {
 public:
  JudgeFormatError(std::string message, std::string raw_reply,
                   ErrorKind kind = ErrorKind::JudgeFormat)
      : Error(kind, std::move(message)), raw_reply_(std::move(raw_reply)) {}

  const std::string& raw_reply() const noexcept { return raw_reply_; }

 private:
  std::string raw_reply_;
};

template <ErrorKind K>
class TypedJudgeError : public JudgeFormatError {
 public:
  TypedJudgeError(std::string message, std::string raw_reply)
      : JudgeFormatError(std::move(message), std::move(raw_reply), K) {}
};

using UnparseableReply = TypedJudgeError<ErrorKind::UnparseableReply>;
using MissingFieldError = TypedJudgeError<ErrorKind::MissingField>;
using NonQuantizedScore = TypedJudgeError<ErrorKind::NonQuantizedScore>;
using CardinalityError = TypedJudgeError<ErrorKind::Cardinality>;
using DuplicateIdError = TypedJudgeError<ErrorKind::DuplicateId>;

}  // namespace longwrite
