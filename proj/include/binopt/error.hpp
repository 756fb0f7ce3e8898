#pragma once

#include <stdexcept>

namespace binopt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad argument to a library operation (window parity, bounds, dimension mismatch).
struct ParameterError : Error {
    using Error::Error;
};

/// File system or file format failure.
struct IoError : Error {
    using Error::Error;
};

/// Numerical failure (factorization, degenerate histogram).
struct ModelError : Error {
    using Error::Error;
};

/// Metric undefined for the given image pair.
struct MetricError : Error {
    using Error::Error;
};

}  // namespace binopt
