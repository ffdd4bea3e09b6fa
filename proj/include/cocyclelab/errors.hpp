#pragma once

#include <stdexcept>
#include <string>

namespace cocyclelab {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Input matrix is numerically singular for an operation that needs s_m > 0.
class SingularInput : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DimMismatch : public Error {
 public:
  using Error::Error;
};

class SignatureMismatch : public Error {
 public:
  using Error::Error;
};

/// A required gap ratio is below 1 + tol_gap, so the flags are ill defined.
class NoGap : public Error {
 public:
  explicit NoGap(const std::string& what, int index = -1)
      : Error(what), offending_index(index) {}
  int offending_index;
};

class NotNested : public Error {
 public:
  using Error::Error;
};

class NotUnit : public Error {
 public:
  using Error::Error;
};

class ProductDegenerate : public Error {
 public:
  using Error::Error;
};

class AlphaDegenerate : public Error {
 public:
  using Error::Error;
};

class SamplingExhausted : public Error {
 public:
  using Error::Error;
};

/// A shadowing hypothesis failed; `item` is one of 'a'..'d'.
class HypothesisFailed : public Error {
 public:
  HypothesisFailed(const std::string& what, char item_) : Error(what), item(item_) {}
  char item;
};

class OutsideStrip : public Error {
 public:
  using Error::Error;
};

class SingularOnTorus : public Error {
 public:
  using Error::Error;
};

class SingularOnOrbit : public Error {
 public:
  using Error::Error;
};

class WNotInvertible : public Error {
 public:
  using Error::Error;
};

class UnknownName : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cocyclelab
