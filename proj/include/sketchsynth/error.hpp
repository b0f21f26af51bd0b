#pragma once

#include <stdexcept>
#include <string>

namespace sketchsynth {

/// Bad input data: malformed files, inconsistent dimensions, violated
/// preconditions on user-supplied values.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A broken internal invariant. Seeing one of these is a bug.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace sketchsynth
