#pragma once

#include <stdexcept>
#include <string>

namespace sel {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An enumeration or search would exceed its configured cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

// A separation scale was requested below the certified resolution (eps <= 2*tail).
class MarginViolation : public Error {
 public:
  using Error::Error;
};

// A point fell outside every member of a cover (cover/window mismatch).
class NotCovered : public Error {
 public:
  using Error::Error;
};

// A pattern window does not contain the ball needed for a metric evaluation.
class WindowTooSmall : public Error {
 public:
  using Error::Error;
};

// No pattern is allowed anywhere (the system is degenerate).
class EmptySystem : public Error {
 public:
  using Error::Error;
};

// Constraints are too long-range for the nearest-neighbour recoding cap.
class NotRecodable : public Error {
 public:
  using Error::Error;
};

// Measure evaluation requested on a window shape the measure cannot handle.
class UnsupportedWindow : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace sel
