#pragma once

#include <stdexcept>
#include <string>

namespace tlc {

// Invalid configuration or parameters. Maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A modeling assumption was violated during a run: a second burst in
// single-burst mode, or queue 2 growing while a burst is in transit.
struct ModelViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN or otherwise unusable state.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Event stream does not match what the consumer expects.
struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnsupportedMode : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace tlc
