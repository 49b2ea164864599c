#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace shorlab {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A precondition on plain inputs (modulus shape, parameter ranges) was violated.
struct InvalidArgumentError : Error {
  using Error::Error;
};

/// The base shares a factor with the modulus.  The gcd itself is carried along,
/// since in a factoring context it already is a nontrivial divisor.
struct NotCoprimeError : Error {
  std::int64_t gcd;
  NotCoprimeError(std::int64_t g, const std::string& msg) : Error(msg), gcd(g) {}
};

/// A register value does not fit the register it is written to.
struct ValueOutOfRangeError : Error {
  using Error::Error;
};

/// A value on the state's support is outside the domain an arithmetic map is defined on.
struct InputOutOfRangeError : Error {
  using Error::Error;
};

/// Two support labels mapped to the same target label; the map is not a permutation.
struct NotInjectiveError : Error {
  using Error::Error;
};

struct NotUnitaryError : Error {
  using Error::Error;
};

/// A register expected to hold |0> on the support does not.
struct NotZeroedError : Error {
  using Error::Error;
};

struct TooLargeError : Error {
  using Error::Error;
};

struct LayoutMismatchError : Error {
  using Error::Error;
};

struct UnknownRegisterError : Error {
  using Error::Error;
};

/// The support is not a uniform coset ladder; decoding left a residual
/// excitation in the work register.
struct NotCosetStateError : Error {
  double residual_norm;
  NotCosetStateError(double res, const std::string& msg) : Error(msg), residual_norm(res) {}
};

/// Recentering would move part of the ladder below zero.
struct RecenterUnderflowError : Error {
  using Error::Error;
};

struct AncillaNotZeroError : Error {
  using Error::Error;
};

/// short_mul only accepts odd multipliers; callers split even ones into
/// odd part times a power of two.
struct EvenMultiplierError : Error {
  using Error::Error;
};

/// digits() was asked to express a value that does not fit the digit count.
struct DigitOverflowError : Error {
  using Error::Error;
};

struct UnknownVariantError : Error {
  using Error::Error;
};

/// Strict footprint accounting detected more live dits than budgeted.
struct FootprintExceededError : Error {
  int live, budget;
  FootprintExceededError(int l, int b, const std::string& msg)
      : Error(msg), live(l), budget(b) {}
};

}  // namespace shorlab
