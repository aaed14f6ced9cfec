#pragma once

#include <stdexcept>
#include <string>

namespace specguard {

/// Base class for every error the library throws. Evaluation-time outcomes
/// (verdicts, answer parse failures, synthesis statuses) are values, not errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class UnresolvedRef : public Error {
 public:
  explicit UnresolvedRef(std::string ref)
      : Error("unresolved reference: " + ref), ref_(std::move(ref)) {}
  const std::string& ref() const noexcept { return ref_; }

 private:
  std::string ref_;
};

class CycleDepthExceeded : public Error {
 public:
  using Error::Error;
};

class NoSuchResponse : public Error {
 public:
  using Error::Error;
};

class MissingBinding : public Error {
 public:
  explicit MissingBinding(std::string name)
      : Error("missing binding for placeholder {" + name + "}"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class CacheMiss : public Error {
 public:
  explicit CacheMiss(std::string digest)
      : Error("transcript cache miss for digest " + digest), digest_(std::move(digest)) {}
  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

class ProviderError : public Error {
 public:
  using Error::Error;
};

/// Retryable transport failure (connection reset, 429, 5xx).
class TransientProviderError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

class IrSyntaxError : public Error {
 public:
  IrSyntaxError(std::string node_path, const std::string& message)
      : Error(message + " at " + (node_path.empty() ? std::string("/") : node_path)),
        node_path_(std::move(node_path)) {}
  const std::string& node_path() const noexcept { return node_path_; }

 private:
  std::string node_path_;
};

/// Expression rejected at build time (sort mismatch, bad regex, bad arity).
class IrBuildError : public Error {
 public:
  using Error::Error;
};

class BadArity : public IrBuildError {
 public:
  using IrBuildError::IrBuildError;
};

class EmptyInput : public Error {
 public:
  using Error::Error;
};

class TraceParseError : public Error {
 public:
  TraceParseError(std::size_t line, const std::string& message)
      : Error("trace line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MissingJudgment : public Error {
 public:
  explicit MissingJudgment(std::string id)
      : Error("no judgment for mined constraint " + id), id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string field_path, const std::string& message)
      : Error(field_path + ": " + message), field_path_(std::move(field_path)) {}
  const std::string& field_path() const noexcept { return field_path_; }

 private:
  std::string field_path_;
};

}  // namespace specguard
