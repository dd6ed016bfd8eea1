#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace teleop {

/// Classified failure kinds shared by every module. The bench and the
/// session event stream report these by name, so keep `to_string` in sync.
enum class ErrorCode {
  kInvalidArgument,
  kInvalidQuaternion,
  kUnknownUnit,
  kVelocityLimit,
  kInvalidIntent,
  // msgbus
  kUnknownTopic,
  kTypeMismatch,
  kQueueOverflow,
  // simulator / controller
  kAlreadyRunning,
  kNonFiniteCommand,
  kTimeout,
  kSensorStale,
  kAborted,
  kBusFailure,
  // parse_response
  kUnparseable,
  kWrongArity,
  kNonNumeric,
  kNegativeMagnitude,
  kNonPositiveSpeed,
  kUnknownDirection,
  // rule-based interpreter
  kEmptyInput,
  kUninterpretable,
  kAmbiguous,
  // provider
  kProviderError,
  kProviderTimeout,
  kMalformedResponse,
  // speech
  kAudioFormat,
  kNoSpeech,
  kNotUnderstood,
  kServiceError,
  // service
  kQueueFull,
  kShutdown,
  kConfig,
  kDataIntegrity,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace teleop
