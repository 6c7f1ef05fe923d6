#pragma once

#include <stdexcept>
#include <string>

namespace mvembed {

// Bad input (missing files, malformed data, invalid flag combinations).
// The CLI maps this to exit code 2; everything else maps to 1.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal invariant violations (NaN parameters, shape mismatches).
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace mvembed
