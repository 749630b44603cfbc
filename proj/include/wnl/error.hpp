#pragma once

#include <stdexcept>
#include <string>

namespace wnl {

// Base of every error raised by the library. The CLI maps any of these that
// escape a pipeline to exit code 2 (input error).
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Grid too small for a stencil or a requested operation.
class SizingError : public Error {
public:
  using Error::Error;
};

// A station, band or subregion lies outside the grid or off the station lattice.
class DomainError : public Error {
public:
  using Error::Error;
};

// Requested Fourier window reaches the Nyquist mode.
class AliasingError : public Error {
public:
  using Error::Error;
};

// det g <= 0 somewhere (the map is not an immersion at grid resolution).
class ImmersionError : public Error {
public:
  using Error::Error;
};

// Operation stated in conformal gauge was given a non-conformal field.
class ConformalityError : public Error {
public:
  using Error::Error;
};

class ParameterError : public Error {
public:
  using Error::Error;
};

class ConditioningError : public Error {
public:
  using Error::Error;
};

class FileFormatError : public Error {
public:
  using Error::Error;
};

// Inversion centre too close to the surface.
class ProximityError : public Error {
public:
  using Error::Error;
};

} // namespace wnl
