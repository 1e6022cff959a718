#pragma once

#include <stdexcept>
#include <string>

namespace cip {

/// Input violates a contract (bad shape, unsynchronized videos, duplicate
/// records, ...). The CLI maps this to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written. The CLI maps this to exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cip
