#pragma once

#include <stdexcept>
#include <string>

namespace phl {

struct PhlError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// parser diagnostics carry source positions
struct ParseError : PhlError {
    int line, col;
    ParseError(int line_, int col_, const std::string& msg)
        : PhlError("parse error at " + std::to_string(line_) + ":" + std::to_string(col_) + ": " + msg),
          line(line_), col(col_) {}
};

struct UnboundVariableError : PhlError {
    using PhlError::PhlError;
};

struct NotWellFormedError : PhlError {
    using PhlError::PhlError;
};

struct DegeneratePredicateError : PhlError {
    using PhlError::PhlError;
};

struct SchedulerActionDisabledError : PhlError {
    using PhlError::PhlError;
};

struct SizeCapError : PhlError {
    using PhlError::PhlError;
};

struct EmptyProductError : PhlError {
    using PhlError::PhlError;
};

struct FormulaTooLargeError : PhlError {
    using PhlError::PhlError;
};

struct StateBlowupError : PhlError {
    using PhlError::PhlError;
};

struct NotSafetyError : PhlError {
    using PhlError::PhlError;
};

struct AlphabetMismatchError : PhlError {
    using PhlError::PhlError;
};

struct NonConvergenceError : PhlError {
    using PhlError::PhlError;
};

struct ConfigError : PhlError {
    using PhlError::PhlError;
};

} // namespace phl
