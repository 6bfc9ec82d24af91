#pragma once

#include <stdexcept>
#include <string>

namespace unifact {

/// Base class for all library errors. CLI maps these to exit code 3.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct SingularMatrix : Error {
    using Error::Error;
};

struct OutOfRadius : Error {
    using Error::Error;
};

struct NearSingularColumn : Error {
    using Error::Error;
};

struct NotDivisible : Error {
    using Error::Error;
};

struct EmptyBand : Error {
    using Error::Error;
};

struct ZeroMargin : Error {
    using Error::Error;
};

struct UnboundedQuotient : Error {
    using Error::Error;
};

struct NotUnipotent : Error {
    using Error::Error;
};

struct PairInvariantViolation : Error {
    using Error::Error;
};

struct SmallPivot : Error {
    using Error::Error;
};

struct PivotVanishes : Error {
    using Error::Error;
};

struct CannotSatisfy : Error {
    using Error::Error;
};

struct CoverDoesNotContainZeroSet : Error {
    using Error::Error;
};

struct NotIdentityNearZeroSet : Error {
    using Error::Error;
};

struct ZeroSetsIntersect : Error {
    using Error::Error;
};

struct CommonZero : Error {
    using Error::Error;
};

struct NoSeparatingNeighborhood : Error {
    using Error::Error;
};

struct CannotTaper : Error {
    using Error::Error;
};

struct SizeGuard : Error {
    using Error::Error;
};

struct UnknownPair : Error {
    using Error::Error;
};

struct DomainMismatch : Error {
    using Error::Error;
};

struct BadInput : Error {
    using Error::Error;
};

/// Wraps an error thrown inside a pipeline stage with the stage name.
struct StageError : Error {
    std::string stage;
    StageError(std::string stage_name, const std::string& what)
        : Error("[" + stage_name + "] " + what), stage(std::move(stage_name)) {}
};

} // namespace unifact
