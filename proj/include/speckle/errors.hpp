#pragma once

#include <stdexcept>
#include <string>

namespace speckle {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ProbeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TruncationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TailError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct StabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularTime : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NegativeVariance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CovarianceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SampleSizeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DegenerateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace speckle
