#ifndef CMMI_ERRORS_HPP
#define CMMI_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace cmmi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, invalid PMF, mismatched grids.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// An argument outside the domain of a logarithm or ratio.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A truth function with zero logical probability, or a sample with zero variance.
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// A distribution that places no mass on the grid.
class SupportError : public Error {
public:
    using Error::Error;
};

/// A classifier configuration that cannot produce labels.
class ConfigurationError : public Error {
public:
    using Error::Error;
};

class UnsupportedDimensionError : public Error {
public:
    using Error::Error;
};

/// A 1D partition that does not have exactly one label change.
/// `crossings` holds the coordinate of the first cell after every change.
class MultiBoundaryError : public Error {
public:
    MultiBoundaryError(const std::string& what, std::vector<double> crossings)
        : Error(what), crossings_(std::move(crossings)) {}

    const std::vector<double>& crossings() const noexcept { return crossings_; }

private:
    std::vector<double> crossings_;
};

} // namespace cmmi

#endif
