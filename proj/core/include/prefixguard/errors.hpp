#pragma once

#include <stdexcept>
#include <string>

namespace prefixguard {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed textual input: prefixes, AS numbers, relationship lines, records.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Detection or mitigation configuration that violates its invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid simulation request (unknown AS, impossible scenario, no convergence).
class SimulationError : public Error {
 public:
  using Error::Error;
};

/// Feed contract violation, e.g. timestamps going backwards in strict mode.
class FeedError : public Error {
 public:
  using Error::Error;
};

}  // namespace prefixguard
