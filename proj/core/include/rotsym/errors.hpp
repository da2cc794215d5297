#pragma once

#include <stdexcept>
#include <string>

namespace rotsym {

/// Base class for all domain errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Axis vector too short to normalize (norm below kAxisEpsilon).
struct ZeroAxis : Error {
  using Error::Error;
};

/// Seed vertex coincides with the rotation center.
struct DegenerateSeed : Error {
  using Error::Error;
};

/// A 3D point is behind the camera or closer than kDepthEpsilon.
struct BehindCamera : Error {
  BehindCamera(std::string point_label, double depth)
      : Error("point '" + point_label + "' is behind the camera (z=" +
              std::to_string(depth) + ")"),
        label(std::move(point_label)),
        z(depth) {}
  std::string label;
  double z;
};

/// Dimension mismatch (cost matrices, vertex lists, score maps).
struct ShapeError : Error {
  using Error::Error;
};

/// A prediction lacks the confidence required by the cost/loss being built.
struct MissingScore : Error {
  using Error::Error;
};

/// Ground-truth and prediction scene sets do not pair one-to-one by id.
struct IdMismatch : Error {
  using Error::Error;
};

/// Invalid configuration or unparseable input file.
struct ConfigError : Error {
  using Error::Error;
};

/// Parameters too close to a precondition boundary to differentiate.
struct Degenerate : Error {
  using Error::Error;
};

}  // namespace rotsym
