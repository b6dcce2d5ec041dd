#pragma once

#include <stdexcept>
#include <string>

namespace covidx {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (missing file, duplicate date, bad cell).
class DataError : public Error {
public:
    using Error::Error;
};

/// A required column is absent from a fixed-schema CSV.
class SchemaError : public DataError {
public:
    SchemaError(const std::string& column)
        : DataError("missing required column: " + column), column_(column) {}

    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// A column with too few observations to impute.
class UnimputableColumnError : public DataError {
public:
    explicit UnimputableColumnError(const std::string& column)
        : DataError("column has fewer than 2 observed values: " + column), column_(column) {}

    const std::string& column() const noexcept { return column_; }

private:
    std::string column_;
};

/// A transform was applied outside its mathematical domain (log of a non-positive value).
class DomainError : public DataError {
public:
    using DataError::DataError;
};

/// Out-of-range argument or invalid configuration value.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input that makes an estimator ill-posed (zero-variance panel, constant series).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// An iterative estimator hit its iteration cap before meeting its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, int iterations)
        : Error(what + " did not converge after " + std::to_string(iterations) + " iterations"),
          iterations_(iterations) {}

    int iterations() const noexcept { return iterations_; }

private:
    int iterations_;
};

/// Too many ensemble members failed.
class EnsembleError : public Error {
public:
    using Error::Error;
};

} // namespace covidx
