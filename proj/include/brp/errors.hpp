#pragma once

#include <stdexcept>
#include <string>

namespace brp {

// Base class for everything this library throws.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operand shapes do not satisfy an operation's precondition.
struct shape_error : error {
    using error::error;
};

// Invalid configuration (rank/oversample/q out of range, bad flags).
struct config_error : error {
    using error::error;
};

// A matrix that must be inverted is singular or too ill-conditioned.
struct singular_error : error {
    singular_error(const std::string& what, double cond)
        : error(what), cond_estimate(cond) {}
    double cond_estimate;
};

// A bound's hypothesis (p >= 2, p >= 4, u,t >= 1) is violated.
struct hypothesis_error : error {
    using error::error;
};

// The spectrum is degenerate where a bound divides by lambda_r.
struct degenerate_spectrum_error : error {
    using error::error;
};

// A file failed to parse (bad header, malformed number, non-finite value).
struct parse_error : error {
    using error::error;
};

// Filesystem-level failure (open, write, rename).
struct io_error : error {
    using error::error;
};

} // namespace brp
