// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace ironstream {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid configuration: bad scenario/montage/acquisition parameters,
/// unknown labels, menu violations. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Access to an address outside the documented register map.
class AddressError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation
/// (empty series, zero divisor, empty frequency band).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range coded value (24-bit codes, packets).
class CodecError : public Error {
 public:
  using Error::Error;
};

/// Operation invoked against the documented protocol (e.g. impedance
/// estimation over frames acquired without lead-off excitation).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Filesystem / socket failures. Maps to CLI exit code 4.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ironstream
