#pragma once

#include <stdexcept>
#include <string>

namespace gridfuse {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Both mass functions fully contradict each other (1 - kappa below threshold).
struct TotalConflict : Error {
    TotalConflict() : Error("Dempster combination: total conflict") {}
};

struct NonFiniteEvidence : Error {
    NonFiniteEvidence() : Error("evidence values must be finite and nonnegative") {}
};

struct GeometryMismatch : Error {
    GeometryMismatch() : Error("grid geometries differ") {}
};

struct ShapeMismatch : Error {
    explicit ShapeMismatch(const std::string& what) : Error("shape mismatch: " + what) {}
};

struct PlacementFailure : Error {
    PlacementFailure() : Error("could not place vehicles in scenario after bounded retries") {}
};

struct EmptyDataset : Error {
    EmptyDataset() : Error("training requires non-empty train and validation splits") {}
};

struct EmptyInput : Error {
    EmptyInput() : Error("aggregation requires at least one record") {}
};

struct IoError : Error {
    using Error::Error;
};

struct BadMagic : IoError {
    BadMagic() : IoError("bad file magic") {}
};

struct VersionMismatch : IoError {
    VersionMismatch() : IoError("unsupported format version") {}
};

struct TruncatedFile : IoError {
    TruncatedFile() : IoError("file ends before payload is complete") {}
};

struct InvariantViolation : IoError {
    InvariantViolation() : IoError("loaded cell violates m_F + m_O <= 1") {}
};

}  // namespace gridfuse
