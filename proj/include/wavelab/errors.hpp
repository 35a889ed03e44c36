#pragma once

#include <stdexcept>
#include <string>

namespace wavelab {

// Base class for all recoverable errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An argument is outside the documented range of the operation.
struct DomainError : Error {
    using Error::Error;
};

// Containers are inconsistent with each other (length/grid mismatch).
struct StructuralError : Error {
    using Error::Error;
};

// A rescaled or resampled field would leave the computational ball.
struct GeometryError : Error {
    using Error::Error;
};

// A ladder rung cannot be built; the message names the violated inequality.
struct ConstructionError : Error {
    using Error::Error;
};

// Ladder evaluated past the plateau of the last built rung.
struct NeedsMoreRungsError : Error {
    using Error::Error;
};

// A space-time norm was requested for a Lebesgue exponent the ledger does
// not track.
struct MissingChannelError : Error {
    using Error::Error;
};

// A single ledger step already exceeds the partition threshold.
struct ResolutionTooCoarseError : Error {
    using Error::Error;
};

// Picard iteration: successive-difference ratios stayed >= 1, so the
// smallness condition is violated on this interval.
struct NoContractionError : Error {
    using Error::Error;
};

// The rung-count integral plateaued (or the integration bound overflowed)
// before the target was reached: the slow-average-growth condition fails
// for this g at this target.
struct NoRungCountError : Error {
    NoRungCountError(const std::string& msg, double reached_, double target_)
        : Error(msg), reached(reached_), target(target_) {}
    double reached;
    double target;
};

// Raised by the stepper when the field overflows; the driver truncates the
// run and flags it instead of crashing.
struct BlowupSignal : Error {
    using Error::Error;
};

}  // namespace wavelab
