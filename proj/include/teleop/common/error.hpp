#pragma once

#include <stdexcept>
#include <string>

namespace teleop {

/// Root of every exception thrown by the teleop libraries.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A document (model, map, world, script, log line, frame) is malformed.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace teleop
