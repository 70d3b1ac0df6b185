#pragma once

#include <stdexcept>
#include <string>

namespace trex {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad run configuration: unknown dataset, malformed config file, bad flag combos.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Schema violations: unknown label name, broken involution, label outside schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Corpus ingestion failures; message names the offending doc/id/position.
class LoadError : public Error {
 public:
  using Error::Error;
};

class MarkingError : public Error {
 public:
  using Error::Error;
};

// Assertion events do not match the target pair in orient().
class OrientationError : public Error {
 public:
  using Error::Error;
};

// Transport or provider failure after retries are exhausted.
class GatewayError : public Error {
 public:
  using Error::Error;
};

class EmptyReplyError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class OracleError : public Error {
 public:
  using Error::Error;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace trex
