#pragma once

#include <stdexcept>
#include <string>

namespace sct {

// Base class for all domain errors raised by this library. CLI maps these to
// exit code 1; anything else is a bug.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// panel
struct MissingCell : Error {
    using Error::Error;
};
struct DuplicateCell : Error {
    using Error::Error;
};
struct NonNumericValue : Error {
    using Error::Error;
};
struct UnknownUnit : Error {
    using Error::Error;
};
struct InvalidDesign : Error {
    using Error::Error;
};
struct EmptyWindow : Error {
    using Error::Error;
};
struct WindowTooShortForDifferencing : Error {
    using Error::Error;
};
struct SeriesTooShort : Error {
    using Error::Error;
};

// simplex_qp
struct DimensionMismatch : Error {
    using Error::Error;
};
struct DidNotConverge : Error {
    using Error::Error;
};

// estimators
struct EmptyValidationWindow : Error {
    using Error::Error;
};

// diagnostics
struct DivisionByZeroTreatedValue : Error {
    using Error::Error;
};

// inference
struct InsufficientPrePeriods : Error {
    using Error::Error;
};

// bias_lab
struct InvalidSpec : Error {
    using Error::Error;
};

}  // namespace sct
