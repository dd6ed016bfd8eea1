#include "teleop/core.hpp"

#include <cctype>
#include <cmath>
#include <sstream>
#include <string>

namespace teleop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kInvalidQuaternion: return "invalid_quaternion";
    case ErrorCode::kUnknownUnit: return "unknown_unit";
    case ErrorCode::kVelocityLimit: return "velocity_limit";
    case ErrorCode::kInvalidIntent: return "invalid_intent";
    case ErrorCode::kUnknownTopic: return "unknown_topic";
    case ErrorCode::kTypeMismatch: return "type_mismatch";
    case ErrorCode::kQueueOverflow: return "queue_overflow";
    case ErrorCode::kAlreadyRunning: return "already_running";
    case ErrorCode::kNonFiniteCommand: return "non_finite_command";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kSensorStale: return "sensor_stale";
    case ErrorCode::kAborted: return "aborted";
    case ErrorCode::kBusFailure: return "bus_failure";
    case ErrorCode::kUnparseable: return "unparseable";
    case ErrorCode::kWrongArity: return "wrong_arity";
    case ErrorCode::kNonNumeric: return "non_numeric";
    case ErrorCode::kNegativeMagnitude: return "negative_magnitude";
    case ErrorCode::kNonPositiveSpeed: return "non_positive_speed";
    case ErrorCode::kUnknownDirection: return "unknown_direction";
    case ErrorCode::kEmptyInput: return "empty_input";
    case ErrorCode::kUninterpretable: return "uninterpretable";
    case ErrorCode::kAmbiguous: return "ambiguous";
    case ErrorCode::kProviderError: return "provider_error";
    case ErrorCode::kProviderTimeout: return "provider_timeout";
    case ErrorCode::kMalformedResponse: return "malformed_response";
    case ErrorCode::kAudioFormat: return "audio_format";
    case ErrorCode::kNoSpeech: return "no_speech";
    case ErrorCode::kNotUnderstood: return "not_understood";
    case ErrorCode::kServiceError: return "service_error";
    case ErrorCode::kQueueFull: return "queue_full";
    case ErrorCode::kShutdown: return "shutdown";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kDataIntegrity: return "data_integrity";
  }
  return "unknown";
}

void validate_twist(const Twist& twist, const VelocityLimits& limits) {
  if (!std::isfinite(twist.linear_x) || !std::isfinite(twist.angular_z)) {
    throw Error(ErrorCode::kNonFiniteCommand, "twist contains a non-finite component");
  }
  if (std::abs(twist.linear_x) > limits.max_linear) {
    std::ostringstream os;
    os << "linear speed " << twist.linear_x << " m/s exceeds limit " << limits.max_linear;
    throw Error(ErrorCode::kVelocityLimit, os.str());
  }
  if (std::abs(twist.angular_z) > limits.max_angular) {
    std::ostringstream os;
    os << "angular speed " << twist.angular_z << " rad/s exceeds limit "
       << limits.max_angular;
    throw Error(ErrorCode::kVelocityLimit, os.str());
  }
}

double Quaternion::norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

std::string_view to_string(Action action) {
  return action == Action::kMove ? "move" : "rotate";
}

void validate_intent(const CommandIntent& intent) {
  if (!std::isfinite(intent.magnitude) || !std::isfinite(intent.speed)) {
    throw Error(ErrorCode::kInvalidIntent, "intent contains a non-finite value");
  }
  if (intent.speed <= 0.0) {
    throw Error(ErrorCode::kInvalidIntent, "intent speed must be strictly positive");
  }
}

std::string describe(const CommandIntent& intent) {
  std::ostringstream os;
  if (intent.action == Action::kMove) {
    os << "move(" << intent.magnitude << " m, " << intent.speed << " m/s)";
  } else {
    os << "rotate(" << intent.magnitude << " deg, " << intent.speed << " rad/s)";
  }
  return os.str();
}

double wrap_angle(double radians) {
  // remainder() is exact and lands in [-pi, pi]; fold -pi onto +pi.
  double r = std::remainder(radians, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

double yaw_from_quaternion(const Quaternion& q) {
  if (!std::isfinite(q.w) || !std::isfinite(q.x) || !std::isfinite(q.y) ||
      !std::isfinite(q.z)) {
    throw Error(ErrorCode::kInvalidQuaternion, "quaternion has a non-finite component");
  }
  const double siny_cosp = 2.0 * (q.w * q.z + q.x * q.y);
  const double cosy_cosp = 1.0 - 2.0 * (q.y * q.y + q.z * q.z);
  return wrap_angle(std::atan2(siny_cosp, cosy_cosp));
}

Quaternion quaternion_from_yaw(double yaw) {
  return {std::cos(yaw / 2.0), 0.0, 0.0, std::sin(yaw / 2.0)};
}

namespace {

std::string normalize_unit(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

// Divisions rather than multiplication by 0.01 keep the cm/mm cases exact
// for values like 150 cm -> 1.5 m.
double convert_length(double value, LengthUnit unit) {
  switch (unit) {
    case LengthUnit::kMeter: return value;
    case LengthUnit::kCentimeter: return value / 100.0;
    case LengthUnit::kMillimeter: return value / 1000.0;
    case LengthUnit::kKilometer: return value * 1000.0;
  }
  throw Error(ErrorCode::kUnknownUnit, "unknown length unit");
}

double length_in_unit(double meters, LengthUnit unit) {
  switch (unit) {
    case LengthUnit::kMeter: return meters;
    case LengthUnit::kCentimeter: return meters * 100.0;
    case LengthUnit::kMillimeter: return meters * 1000.0;
    case LengthUnit::kKilometer: return meters / 1000.0;
  }
  throw Error(ErrorCode::kUnknownUnit, "unknown length unit");
}

double convert_speed(double value, SpeedUnit unit) {
  switch (unit) {
    case SpeedUnit::kMetersPerSecond: return value;
    case SpeedUnit::kKilometersPerHour: return value / 3.6;
    case SpeedUnit::kCentimetersPerSecond: return value / 100.0;
  }
  throw Error(ErrorCode::kUnknownUnit, "unknown speed unit");
}

double speed_in_unit(double meters_per_second, SpeedUnit unit) {
  switch (unit) {
    case SpeedUnit::kMetersPerSecond: return meters_per_second;
    case SpeedUnit::kKilometersPerHour: return meters_per_second * 3.6;
    case SpeedUnit::kCentimetersPerSecond: return meters_per_second * 100.0;
  }
  throw Error(ErrorCode::kUnknownUnit, "unknown speed unit");
}

LengthUnit parse_length_unit(std::string_view text) {
  const std::string u = normalize_unit(text);
  if (u == "m" || u == "meter" || u == "meters" || u == "metre" || u == "metres") {
    return LengthUnit::kMeter;
  }
  if (u == "cm" || u == "centimeter" || u == "centimeters" || u == "centimetre" ||
      u == "centimetres") {
    return LengthUnit::kCentimeter;
  }
  if (u == "mm" || u == "millimeter" || u == "millimeters" || u == "millimetre" ||
      u == "millimetres") {
    return LengthUnit::kMillimeter;
  }
  if (u == "km" || u == "kilometer" || u == "kilometers" || u == "kilometre" ||
      u == "kilometres") {
    return LengthUnit::kKilometer;
  }
  throw Error(ErrorCode::kUnknownUnit, "unknown length unit '" + std::string(text) + "'");
}

SpeedUnit parse_speed_unit(std::string_view text) {
  const std::string u = normalize_unit(text);
  for (std::string_view prefix : {"meter", "meters", "metre", "metres"}) {
    if (u == std::string(prefix) + " per second") return SpeedUnit::kMetersPerSecond;
  }
  if (u == "m/s" || u == "mps" || u == "m s-1") return SpeedUnit::kMetersPerSecond;
  for (std::string_view prefix : {"kilometer", "kilometers", "kilometre", "kilometres"}) {
    if (u == std::string(prefix) + " per hour") return SpeedUnit::kKilometersPerHour;
  }
  if (u == "km/h" || u == "kmh" || u == "kph" || u == "kmph") {
    return SpeedUnit::kKilometersPerHour;
  }
  for (std::string_view prefix : {"centimeter", "centimeters", "centimetre", "centimetres"}) {
    if (u == std::string(prefix) + " per second") return SpeedUnit::kCentimetersPerSecond;
  }
  if (u == "cm/s" || u == "cmps") return SpeedUnit::kCentimetersPerSecond;
  throw Error(ErrorCode::kUnknownUnit, "unknown speed unit '" + std::string(text) + "'");
}

}  // namespace teleop
