#pragma once

#include <stdexcept>
#include <string>

namespace tvcs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The measurement matrix does not have full row rank.
class DegenerateEnsemble : public Error {
 public:
  using Error::Error;
};

/// Haar routines only accept power-of-two side lengths.
class UnsupportedLength : public Error {
 public:
  using Error::Error;
};

class SparsityTooLarge : public Error {
 public:
  using Error::Error;
};

/// A guarded exact routine (LP oracle, exhaustive certificate) was asked to
/// run beyond its size limit.
class ScaleGuard : public Error {
 public:
  using Error::Error;
};

class Infeasible : public Error {
 public:
  using Error::Error;
};

class OutOfRegime : public Error {
 public:
  using Error::Error;
};

class EstimatorUnstable : public Error {
 public:
  using Error::Error;
};

/// find_m50 never reached a 50% success rate.
class Saturation : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace tvcs
