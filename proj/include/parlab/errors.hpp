// Copyright (C) 2026 parlab contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef PARLAB_ERRORS_HPP
#define PARLAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace parlab {

/// Tensor shape disagreement (names both shapes in the message).
class ShapeError : public std::runtime_error {
public:
    explicit ShapeError(const std::string& what) : std::runtime_error(what) {}
};

/// A caller-supplied value is out of its documented range.
class ArgumentError : public std::invalid_argument {
public:
    explicit ArgumentError(const std::string& what) : std::invalid_argument(what) {}
};

/// An operation's precondition on internal state was violated.
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

/// Run configuration could not be parsed or validated.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A pipeline stage is missing an input artifact; message names the
/// command that produces it.
class PreconditionError : public std::runtime_error {
public:
    explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace parlab

#endif
