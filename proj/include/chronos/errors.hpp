#pragma once

#include <stdexcept>
#include <string>

namespace chronos {

// Base class for all domain errors raised by the library. The CLI maps
// these to exit code 2; plain I/O failures map to exit code 1.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};

// numerics
struct NonConvergence : Error {
    using Error::Error;
};
struct SingularInnovation : Error {
    using Error::Error;
};
struct UnstableCoefficient : Error {
    using Error::Error;
};
struct NotPsd : Error {
    using Error::Error;
};

// clock / avar
struct InvalidTau : Error {
    using Error::Error;
};
struct WeightsNotNormalized : Error {
    using Error::Error;
};
struct SeriesTooShort : Error {
    using Error::Error;
};
struct NonIntegerWindow : Error {
    using Error::Error;
};

// network
struct Disconnected : Error {
    using Error::Error;
};
struct TooManyReceivers : Error {
    using Error::Error;
};
struct BadIndex : Error {
    using Error::Error;
};

// estimation / control / sim
struct DimensionMismatch : Error {
    using Error::Error;
};
struct NoStabilizingGainFound : Error {
    using Error::Error;
};
struct NoFeasiblePoint : Error {
    using Error::Error;
};
struct Infeasible : Error {
    using Error::Error;
};
struct GainModeMismatch : Error {
    using Error::Error;
};

// config
struct ValidationError : Error {
    using Error::Error;
};

} // namespace chronos
