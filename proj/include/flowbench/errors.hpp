// SPDX-FileCopyrightText: © 2026 flowbench contributors
//
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace flowbench {

// Process exit codes shared by the CLI and its tests.
enum class ExitCode : int {
    ok = 0,
    validation = 2,
    io = 3,
    internal = 4,
};

/// Base class for all flowbench errors; carries the exit code the CLI maps it to.
class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ExitCode code() const { return code_; }

private:
    ExitCode code_;
};

/// Bad input: malformed files, out-of-range values, violated preconditions.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(ExitCode::validation, what) {}
};

/// Parse failure with source location (1-based line, 0 column = unknown).
class ParseError : public ValidationError {
public:
    ParseError(const std::string& what, std::size_t line, std::size_t column = 0)
        : ValidationError(format(what, line, column)),
          message_(what),
          line_(line),
          column_(column) {}
    /// The reason without the "line N, column M" prefix, for re-wrapping.
    [[nodiscard]] const std::string& message() const { return message_; }
    [[nodiscard]] std::size_t line() const { return line_; }
    [[nodiscard]] std::size_t column() const { return column_; }

private:
    static std::string format(const std::string& what, std::size_t line, std::size_t column) {
        std::string msg = "line " + std::to_string(line);
        if (column > 0) msg += ", column " + std::to_string(column);
        return msg + ": " + what;
    }
    std::string message_;
    std::size_t line_;
    std::size_t column_;
};

/// Filesystem failure: unreadable input, unwritable output.
class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

/// A broken internal invariant; reaching this is a bug in flowbench itself.
class InternalError : public Error {
public:
    explicit InternalError(const std::string& what) : Error(ExitCode::internal, what) {}
};

}  // namespace flowbench
