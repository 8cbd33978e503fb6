#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace planwarp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File missing, unreadable or unwritable.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input file (PGM, YAML, plan or session JSON).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Input geometry violates a precondition: degenerate triangle,
/// self-intersecting polygon, zero-length curve.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// A point or polyline vertex fell outside the region covered by a map.
class OutsideError : public Error {
 public:
  using Error::Error;
};

enum class MappingErrorKind {
  TooFewPairs,
  DuplicatePoint,
  Collinear,
  FoldOver,
  InvalidConstraint,
};

const char* to_string(MappingErrorKind kind);

/// Correspondence set cannot produce a bijective piecewise-affine map.
/// `vertices()` names the offending correspondence indices (the flipped
/// triangle for fold-over, the duplicate pair for duplicates).
class MappingError : public Error {
 public:
  MappingError(MappingErrorKind kind, std::string what,
               std::vector<std::size_t> vertices = {})
      : Error(std::move(what)), kind_(kind), vertices_(std::move(vertices)) {}

  MappingErrorKind kind() const noexcept { return kind_; }
  const std::vector<std::size_t>& vertices() const noexcept { return vertices_; }

 private:
  MappingErrorKind kind_;
  std::vector<std::size_t> vertices_;
};

}  // namespace planwarp
