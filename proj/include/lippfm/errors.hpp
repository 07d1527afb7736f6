#pragma once

#include <stdexcept>
#include <string>

namespace lippfm {

// Invalid physical parameter or config value; message names the offending field.
class InvalidParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Controller synthesis failure (uncontrollable plant, indefinite R, CARE non-convergence).
class SynthesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Integrator produced NaN/inf state components.
class NonFiniteStateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Config file parse/validation failure; message carries field or location context.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failure; message carries the path.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace lippfm
