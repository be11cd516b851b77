#ifndef PPPL_ERROR_HPP
#define PPPL_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pppl {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad dimensions, out-of-range parameters, missing keys.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Input data that cannot be used: unreadable files, malformed cells, bad labels.
class DataError : public Error {
public:
    using Error::Error;
};

/// Matrix or vector shapes that do not chain.
class ShapeError : public DataError {
public:
    using DataError::DataError;
};

/// Non-finite losses, gradients, or scores.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// An adaptation round that left no target sample to train on.
class DegenerateStateError : public NumericalError {
public:
    DegenerateStateError(int round, const std::string& what)
        : NumericalError("round " + std::to_string(round) + ": " + what), round_(round) {}

    int round() const noexcept { return round_; }

private:
    int round_;
};

}  // namespace pppl

#endif  // PPPL_ERROR_HPP
