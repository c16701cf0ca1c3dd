#pragma once

#include <stdexcept>
#include <string>

namespace frenet_racer {

// Base class for everything this library throws on purpose, so callers can
// catch one type at the boundary (CLI, python bindings).
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input data: track CSV, config JSON, checkpoint files.
struct ParseError : Error {
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Config or parameter values that fail validation (out of range, inconsistent).
struct ValidationError : Error {
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// A query point is too far from the track centerline to have a meaningful
// Frenet projection.
struct OutOfCorridorError : Error {
  explicit OutOfCorridorError(const std::string& msg) : Error(msg) {}
};

// Local path generation cannot represent the requested heading as a cubic in
// arclength (heading at or beyond +-pi/2 relative to the centerline tangent).
struct HeadingDegenerateError : Error {
  explicit HeadingDegenerateError(const std::string& msg) : Error(msg) {}
};

// The integrator produced a non-finite state.
struct IntegrationError : Error {
  explicit IntegrationError(const std::string& msg) : Error(msg) {}
};

// Checkpoint file is corrupt or from an incompatible version.
struct CheckpointError : Error {
  explicit CheckpointError(const std::string& msg) : Error(msg) {}
};

}  // namespace frenet_racer
