// Copyright 2026 The sasr Authors
// Licensed under the Apache License, Version 2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sasr {

// Base class so callers can catch everything sasr raises with one handler.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Shape or size mismatch between operands.
class DimensionError : public Error {
  public:
    explicit DimensionError(const std::string &msg) : Error(msg) {}
};

// Input outside the mathematical domain of an operation (zero-norm vector,
// empty softmax, ...).
class DomainError : public Error {
  public:
    explicit DomainError(const std::string &msg) : Error(msg) {}
};

// Inconsistent model/pipeline configuration.
class ConfigError : public Error {
  public:
    explicit ConfigError(const std::string &msg) : Error(msg) {}
};

// Caller violated an API precondition.
class ContractError : public Error {
  public:
    explicit ContractError(const std::string &msg) : Error(msg) {}
};

// Malformed or unexpected file content.
class SchemaError : public Error {
  public:
    explicit SchemaError(const std::string &msg) : Error(msg) {}
};

}  // namespace sasr
