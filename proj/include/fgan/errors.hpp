#pragma once

#include <stdexcept>
#include <string>

namespace fgan {

/// Base class for everything this library throws on contract violations.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor extents do not line up (conv channel mismatch, concat size clash, ...).
struct ShapeError : Error {
  using Error::Error;
};

/// A configuration value is outside its legal range (non-integral conv output
/// extent, dropout p >= 1, image size not divisible by 2^depth, ...).
struct ConfigError : Error {
  using Error::Error;
};

/// Statistics over a degenerate sample (instance norm over a 1x1 map).
struct StatError : Error {
  using Error::Error;
};

/// An API contract was violated (backward on a non-scalar, grad of an
/// untracked tensor, ...).
struct ContractError : Error {
  using Error::Error;
};

/// Malformed file content; the message names the offending field or offset.
struct ParseError : Error {
  using Error::Error;
};

/// Filesystem-level failure; the message carries the path.
struct IoError : Error {
  using Error::Error;
};

/// Input data too short or otherwise unusable for the requested computation.
struct DataError : Error {
  using Error::Error;
};

}  // namespace fgan
