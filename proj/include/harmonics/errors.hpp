#pragma once

#include <stdexcept>
#include <string>

namespace harmonics {

// Base class for all library errors. The CLI maps subclasses onto its
// exit-code taxonomy (validation vs numerical vs convergence).
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: dimensions, files, parameters out of range.
struct ValidationError : Error {
    using Error::Error;
};

// A numerical check failed (residuals, conditioning, realness, ...).
struct NumericalError : Error {
    using Error::Error;
};

struct InvalidDimensionError : ValidationError {
    using ValidationError::ValidationError;
};
struct EmptyEnvironmentError : ValidationError {
    using ValidationError::ValidationError;
};
struct ConnectivityError : ValidationError {
    using ValidationError::ValidationError;
};
struct ParseError : ValidationError {
    using ValidationError::ValidationError;
};
struct ShapeMismatchError : ValidationError {
    using ValidationError::ValidationError;
};
struct DegenerateInputError : ValidationError {
    using ValidationError::ValidationError;
};
struct NodalStartError : ValidationError {
    using ValidationError::ValidationError;
};

struct ComplexSpectrumError : NumericalError {
    using NumericalError::NumericalError;
};
struct NonDiagonalizableError : NumericalError {
    using NumericalError::NumericalError;
};
struct DegenerateSpectrumError : NumericalError {
    using NumericalError::NumericalError;
};
struct InfeasibleDesignError : NumericalError {
    using NumericalError::NumericalError;
};
struct AssemblyError : NumericalError {
    using NumericalError::NumericalError;
};
struct KernelExtractionError : NumericalError {
    using NumericalError::NumericalError;
};
struct DivergenceError : NumericalError {
    using NumericalError::NumericalError;
};
struct IllConditionedError : NumericalError {
    using NumericalError::NumericalError;
};
struct DissipationError : NumericalError {
    using NumericalError::NumericalError;
};

} // namespace harmonics
