#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cdnr {

// Malformed input text. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// A parameter or input value outside the accepted domain.
class ValueError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An operation invoked on an object in the wrong state.
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Least-squares fit could not be performed.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace cdnr
