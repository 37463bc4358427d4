#pragma once

#include <stdexcept>
#include <string>

namespace coptact {

// Base class for all toolkit errors so callers can catch in one place.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// SVD projection is non-unique when the smallest singular value vanishes.
struct RankDeficientError : Error {
    explicit RankDeficientError(const std::string& msg) : Error(msg) {}
};

// Gradient of the SO(3) projection is undefined when singular values
// coincide and det < 0.
struct DegenerateSingularValuesError : Error {
    explicit DegenerateSingularValuesError(const std::string& msg) : Error(msg) {}
};

struct NoContactError : Error {
    explicit NoContactError(const std::string& msg) : Error(msg) {}
};

struct DegenerateNormalError : Error {
    explicit DegenerateNormalError(const std::string& msg) : Error(msg) {}
};

struct DegenerateBlendError : Error {
    explicit DegenerateBlendError(const std::string& msg) : Error(msg) {}
};

struct EmptyDatasetError : Error {
    explicit EmptyDatasetError(const std::string& msg) : Error(msg) {}
};

struct AllSamplesSkippedError : Error {
    explicit AllSamplesSkippedError(const std::string& msg) : Error(msg) {}
};

// Diverging actuator integration.
struct UnstableError : Error {
    explicit UnstableError(const std::string& msg) : Error(msg) {}
};

struct GridMismatchError : Error {
    explicit GridMismatchError(const std::string& msg) : Error(msg) {}
};

struct SingularDesignError : Error {
    explicit SingularDesignError(const std::string& msg) : Error(msg) {}
};

struct SingleClusterError : Error {
    explicit SingleClusterError(const std::string& msg) : Error(msg) {}
};

// Malformed input files or configs (maps to CLI exit code 2).
struct SchemaError : Error {
    explicit SchemaError(const std::string& msg) : Error(msg) {}
};

}  // namespace coptact
