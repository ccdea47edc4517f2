#pragma once

#include <stdexcept>
#include <string>

namespace mxmclr {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Incompatible tensor/matrix shapes.
struct DimensionError : Error {
    using Error::Error;
};

/// Invalid configuration value (bad temperature, fold counts, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// A call violated an API precondition (non-scalar backward root,
/// mask/label inconsistency, ...).
struct ContractError : Error {
    using Error::Error;
};

/// Requested more instances than the dataset holds.
struct SamplingError : Error {
    using Error::Error;
};

/// A file could not be parsed; carries the 1-based line number.
struct ParseError : Error {
    ParseError(const std::string& msg, std::size_t line)
        : Error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    std::size_t line_number;
};

/// A file parsed but violates the dataset schema.
struct SchemaError : Error {
    using Error::Error;
};

/// Non-finite loss or gradients during training.
struct TrainingError : Error {
    using Error::Error;
};

/// Objective returned a non-finite value during a gradient check.
struct EvaluationError : Error {
    using Error::Error;
};

/// File system failure or incompatible checkpoint/dataset pair.
struct IoError : Error {
    using Error::Error;
};

}  // namespace mxmclr
