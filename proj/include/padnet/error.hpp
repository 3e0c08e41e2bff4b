#pragma once

#include <stdexcept>
#include <string>

namespace padnet {

// Bad caller input: out-of-range node, size mismatch, negative entries.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A protocol broke the LOCAL-model rules (non-neighbor send, disconnected cluster).
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class InfeasibleDemandError : public InputError {
 public:
  using InputError::InputError;
};

class InstanceTooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// |I_u| = 0: no iteration padded the demand source, so no averaged flow exists.
class NoCertificateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace padnet
