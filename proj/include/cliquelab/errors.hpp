#pragma once

#include <stdexcept>
#include <string>

namespace cliquelab {

// Malformed arguments to a model operation (bad endpoint, bad node set).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A partial port mapping rejected a pair.
class AssignmentError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Invalid protocol or engine parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised by node code that misbehaves; engines catch it and record it in the
// outcome instead of aborting the run.
class ProtocolFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cliquelab
