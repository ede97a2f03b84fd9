#pragma once

#include <stdexcept>
#include <string>

namespace farrkit {

struct FarrkitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// corpus
struct BudgetTooSmall : FarrkitError {
    using FarrkitError::FarrkitError;
};

// farr extraction / persistence
struct MalformedOutput : FarrkitError {
    using FarrkitError::FarrkitError;
};
struct SchemaViolation : FarrkitError {
    using FarrkitError::FarrkitError;
};
struct EmptyFlow : FarrkitError {
    using FarrkitError::FarrkitError;
};
struct IoError : FarrkitError {
    using FarrkitError::FarrkitError;
};

// llmclient
struct EndpointError : FarrkitError {
    using FarrkitError::FarrkitError;
};
struct AuthError : FarrkitError {
    using FarrkitError::FarrkitError;
};
struct ProtocolError : FarrkitError {
    using FarrkitError::FarrkitError;
};
struct CacheMiss : FarrkitError {
    using FarrkitError::FarrkitError;
};

// judging
struct MalformedVerdict : FarrkitError {
    using FarrkitError::FarrkitError;
};
struct RangeViolation : FarrkitError {
    using FarrkitError::FarrkitError;
};

// aggregate
struct AllStepsFailed : FarrkitError {
    using FarrkitError::FarrkitError;
};

// convgen
struct NoTurnsFound : FarrkitError {
    using FarrkitError::FarrkitError;
};
struct EmptySession : FarrkitError {
    using FarrkitError::FarrkitError;
};

// cli / config
struct ConfigError : FarrkitError {
    using FarrkitError::FarrkitError;
};

}  // namespace farrkit
