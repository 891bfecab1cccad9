#pragma once

#include <stdexcept>
#include <string>

namespace ocft {

/// Base class for every validation failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Wrong matrix dimension (odd Pfaffian order, non-square input, N = 0).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Structural mismatch: failed skew check, wrong block shape, foreign universe.
class ShapeError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

/// Argument outside the mathematical domain of a function or measure.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Run configuration rejected (sample counts, size caps, unsupported order).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ocft
