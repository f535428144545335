// Error hierarchy shared by all dacsim components.
#pragma once

#include <stdexcept>
#include <string>

namespace dacsim {

// Base class; everything thrown by this library derives from it.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A sample or parameter failed a finiteness/validity precondition.
struct RejectedInputError : Error {
    using Error::Error;
};

// Two windows do not share the same grid (step, length or end time).
struct IncompatibleWindowsError : Error {
    using Error::Error;
};

// The gain-functional denominator underflowed to (near) zero.
struct DegenerateWindowError : Error {
    using Error::Error;
};

// q was asked for a window with zero L2 norm.
struct ZeroExcitationError : Error {
    using Error::Error;
};

// Identifier driven out of order (observation outside the open interval).
struct SequencingError : Error {
    using Error::Error;
};

// A stated check precondition does not hold for the supplied data.
struct PreconditionError : Error {
    using Error::Error;
};

// Scenario/controller configuration is invalid. CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// Grid-specific configuration problem (h does not divide r, ...).
struct GridError : ConfigError {
    using ConfigError::ConfigError;
};

// Simulation-side failures. CLI exit code 3.
struct SimulationError : Error {
    using Error::Error;
};

// Initial compatibility equation could not be solved.
struct CompatibilityError : SimulationError {
    using SimulationError::SimulationError;
};

// Per-step fixed point did not converge within the iteration budget.
struct StepFailureError : SimulationError {
    using SimulationError::SimulationError;
};

// |u| crossed the blow-up surrogate threshold (or became non-finite).
struct BlowUpError : SimulationError {
    BlowUpError(const std::string& what, double when) : SimulationError(what), time(when) {}
    double time;
};

// Disturbance table evaluated outside its domain.
struct DisturbanceRangeError : SimulationError {
    using SimulationError::SimulationError;
};

}  // namespace dacsim
