#pragma once

#include <stdexcept>
#include <string>

namespace cgl {

// Bad user-supplied data: sizes, formats, parameter ranges.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A multiplier exponent would overflow double range.
struct RangeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// H^s norm exceeded the configured threshold during time integration.
// Threshold exceedance is a numerical proxy, not proven divergence.
struct BlowupError : std::runtime_error {
    double time;
    double norm;
    BlowupError(double t, double hs_norm)
        : std::runtime_error("H^s norm " + std::to_string(hs_norm) +
                             " exceeded blow-up threshold at t = " + std::to_string(t)),
          time(t),
          norm(hs_norm) {}
};

// Fixed-point iteration stopped contracting.
struct NonContractionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// decompose() could not represent the target within tolerance.
struct DecompositionError : std::runtime_error {
    double best_residual;
    explicit DecompositionError(double best)
        : std::runtime_error("decomposition failed; best residual " + std::to_string(best)),
          best_residual(best) {}
};

// A refinement loop exhausted its budget.
struct NotConvergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace cgl
