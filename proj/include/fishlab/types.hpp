#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fishlab {

using WorkerId = std::uint32_t;

/// One stream element: a simulated arrival time plus an opaque routing key.
struct TupleEvent {
    double arrival_time = 0.0;
    std::string key;
};

/// A configuration value failed validation. The message names the offending field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// External input (tuple file, experiment config, CSV) could not be parsed.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operation applied to an object whose state cannot serve it
/// (empty ring, removing the last worker, ...).
struct StateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fishlab
