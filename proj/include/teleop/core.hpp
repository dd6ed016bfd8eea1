#pragma once

#include <numbers>
#include <string>
#include <string_view>

#include "teleop/error.hpp"

namespace teleop {

inline constexpr double kPi = std::numbers::pi;

/// Velocity command. Only the planar components of a ROS Twist are carried;
/// everything else is implicitly zero.
struct Twist {
  double linear_x = 0.0;   // m/s
  double angular_z = 0.0;  // rad/s

  bool is_zero() const { return linear_x == 0.0 && angular_z == 0.0; }
  friend bool operator==(const Twist&, const Twist&) = default;
};

struct VelocityLimits {
  double max_linear = 2.0;   // m/s
  double max_angular = 4.0;  // rad/s
};

/// Throws kNonFiniteCommand or kVelocityLimit. Over-limit commands are
/// rejected, never saturated.
void validate_twist(const Twist& twist, const VelocityLimits& limits = {});

struct Quaternion {
  double w = 1.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const;
  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

struct RobotPose {
  double x = 0.0;    // m
  double y = 0.0;    // m
  double yaw = 0.0;  // rad, (-pi, pi]

  friend bool operator==(const RobotPose&, const RobotPose&) = default;
};

enum class Action { kMove, kRotate };

std::string_view to_string(Action action);

/// Parsed command. `magnitude` is signed meters for kMove (negative = back)
/// and signed degrees for kRotate (negative = clockwise). `speed` is m/s or
/// rad/s respectively and always > 0.
struct CommandIntent {
  Action action = Action::kMove;
  double magnitude = 0.0;
  double speed = 0.0;

  static CommandIntent move(double meters, double speed) {
    return {Action::kMove, meters, speed};
  }
  static CommandIntent rotate(double degrees, double angular_speed) {
    return {Action::kRotate, degrees, angular_speed};
  }

  friend bool operator==(const CommandIntent&, const CommandIntent&) = default;
};

/// Throws kInvalidIntent when the speed is not strictly positive or any
/// field is non-finite.
void validate_intent(const CommandIntent& intent);

std::string describe(const CommandIntent& intent);

/// Wraps to (-pi, pi].
double wrap_angle(double radians);

constexpr double deg_to_rad(double degrees) { return degrees * kPi / 180.0; }
constexpr double rad_to_deg(double radians) { return radians * 180.0 / kPi; }

/// Standard ZYX yaw extraction. Throws kInvalidQuaternion on non-finite input.
double yaw_from_quaternion(const Quaternion& q);
Quaternion quaternion_from_yaw(double yaw);

enum class LengthUnit { kMeter, kCentimeter, kMillimeter, kKilometer };
enum class SpeedUnit { kMetersPerSecond, kKilometersPerHour, kCentimetersPerSecond };

double convert_length(double value, LengthUnit unit);
double convert_speed(double value, SpeedUnit unit);
/// Inverse conversions (meters -> unit, m/s -> unit).
double length_in_unit(double meters, LengthUnit unit);
double speed_in_unit(double meters_per_second, SpeedUnit unit);

/// Accepts symbols ("cm", "km/h") and spelled names ("centimeters",
/// "kilometers per hour"). Throws kUnknownUnit otherwise.
LengthUnit parse_length_unit(std::string_view text);
SpeedUnit parse_speed_unit(std::string_view text);

}  // namespace teleop
