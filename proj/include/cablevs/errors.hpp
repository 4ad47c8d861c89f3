#pragma once

#include <stdexcept>
#include <string>

namespace cablevs {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A cable length underflowed the degeneracy threshold (exit point
/// coincides with the anchor point).
class DegenerateCable : public Error {
public:
  using Error::Error;
};

/// A matrix that must have full rank does not (smallest singular value
/// below tolerance).
class RankDeficient : public Error {
public:
  using Error::Error;
};

/// The observed object lies behind the camera (non-positive z).
class ObjectBehindCamera : public Error {
public:
  using Error::Error;
};

/// The interaction matrix is singular and cannot be inverted.
class SingularInteraction : public Error {
public:
  using Error::Error;
};

/// Depth must be strictly positive.
class NonpositiveDepth : public Error {
public:
  using Error::Error;
};

/// Rotation at or beyond the representation singularity (angle = pi).
class SingularRotation : public Error {
public:
  using Error::Error;
};

/// Trajectory planning requested between identical feature vectors.
class ZeroHorizon : public Error {
public:
  using Error::Error;
};

/// Unknown named perturbation set.
class UnknownSet : public Error {
public:
  using Error::Error;
};

/// Deviation metric requested on a path whose endpoints coincide.
class DegenerateLine : public Error {
public:
  using Error::Error;
};

/// Configuration file problem; carries file name and 1-based line number
/// (line 0 means the error is not tied to a specific line).
class ConfigError : public Error {
public:
  ConfigError(std::string file, int line, const std::string& message)
      : Error(line > 0 ? file + ":" + std::to_string(line) + ": " + message
                       : file + ": " + message),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const { return file_; }
  int line() const { return line_; }

private:
  std::string file_;
  int line_;
};

}  // namespace cablevs
