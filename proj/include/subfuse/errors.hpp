#pragma once

#include <stdexcept>
#include <string>

namespace subfuse {

// Error categories map onto CLI exit codes: ParseError -> 2,
// ValidationError -> 3, NumericalError (and anything else) -> 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct DimensionMismatch : ValidationError {
    using ValidationError::ValidationError;
};

struct NonFiniteEntry : ValidationError {
    using ValidationError::ValidationError;
};

struct IndexOutOfRange : ValidationError {
    using ValidationError::ValidationError;
};

struct ColumnCountMismatch : ValidationError {
    using ValidationError::ValidationError;
};

struct UnderdeterminedProblem : ValidationError {
    using ValidationError::ValidationError;
};

struct RateOutOfRange : ValidationError {
    using ValidationError::ValidationError;
};

struct EmptyInput : ValidationError {
    using ValidationError::ValidationError;
};

struct SingularGram : NumericalError {
    using NumericalError::NumericalError;
};

struct SingularFusedGram : NumericalError {
    using NumericalError::NumericalError;
};

struct SingularExternalGram : NumericalError {
    using NumericalError::NumericalError;
};

struct SingularCombiner : NumericalError {
    using NumericalError::NumericalError;
};

struct DegenerateRSS : NumericalError {
    using NumericalError::NumericalError;
};

struct NoConvergedFit : NumericalError {
    using NumericalError::NumericalError;
};

struct CsvParseError : ParseError {
    using ParseError::ParseError;
};

struct ConfigParseError : ParseError {
    using ParseError::ParseError;
};

}  // namespace subfuse
