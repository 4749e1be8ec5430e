// Copyright 2026 The edgetap Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace edgetap {

/// NaN or otherwise non-finite argument to a numeric primitive.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Distribution or layout parameters that violate their invariants.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The regression model produced a value outside its physical domain,
/// e.g. a nonpositive variance for the requested layout.
class ModelDomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fit could not be carried out (degenerate design, empty region, ...).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::string field, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", field " + field + ": " + what),
          line_(line),
          field_(std::move(field)) {}

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

}  // namespace edgetap
