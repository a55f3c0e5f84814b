#pragma once

#include <stdexcept>
#include <string>

namespace gandse {

/// Base of every error the library reports. Callers that only need a message catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input supplied by a user (files, flags, arguments).
class InputError : public Error {
public:
    using Error::Error;
};

/// A value that is not a member of its variable's choice list.
class EncodingError : public InputError {
public:
    using InputError::InputError;
};

/// Text or binary file that cannot be parsed. Carries a 1-based line number when known.
class ParseError : public InputError {
public:
    ParseError(const std::string& what, int line = 0)
        : InputError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

/// A (layer, configuration) pair handed to a cost formula that requires feasibility.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

}  // namespace gandse
