#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "teleop/core.hpp"

using namespace teleop;

TEST(YawFromQuaternion, IdentityIsZero) {
  EXPECT_EQ(yaw_from_quaternion({1, 0, 0, 0}), 0.0);
}

TEST(YawFromQuaternion, QuarterTurn) {
  const Quaternion q{std::cos(kPi / 4), 0, 0, std::sin(kPi / 4)};
  EXPECT_NEAR(yaw_from_quaternion(q), kPi / 2, 1e-12);
}

TEST(YawFromQuaternion, RejectsNonFinite) {
  try {
    yaw_from_quaternion({std::numeric_limits<double>::quiet_NaN(), 0, 0, 0});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidQuaternion);
  }
  EXPECT_THROW(yaw_from_quaternion({1, 0, 0, std::numeric_limits<double>::infinity()}), Error);
}

TEST(QuaternionFromYaw, KnownValues) {
  const Quaternion zero = quaternion_from_yaw(0.0);
  EXPECT_EQ(zero, (Quaternion{1, 0, 0, 0}));
  const Quaternion half = quaternion_from_yaw(kPi);
  EXPECT_NEAR(half.w, 0.0, 1e-15);
  EXPECT_NEAR(half.z, 1.0, 1e-15);
  EXPECT_EQ(half.x, 0.0);
  EXPECT_EQ(half.y, 0.0);
}

// 64 yaws spread over (-pi, pi]; the quaternion is built independently from
// the half-angle definition, not through quaternion_from_yaw.
TEST(QuaternionRoundTrip, SixtyFourSampledYaws) {
  for (int i = 1; i <= 64; ++i) {
    const double theta = -kPi + 2.0 * kPi * i / 64.0;
    const Quaternion q{std::cos(theta / 2), 0, 0, std::sin(theta / 2)};
    EXPECT_NEAR(yaw_from_quaternion(q), theta, 1e-9) << "theta=" << theta;
    EXPECT_NEAR(yaw_from_quaternion(quaternion_from_yaw(theta)), theta, 1e-9);
    EXPECT_NEAR(quaternion_from_yaw(theta).norm(), 1.0, 1e-12);
  }
}

TEST(QuaternionRoundTrip, ArbitraryYawWrapsProperty) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-50.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const double yaw = dist(rng);
    const double got = yaw_from_quaternion(quaternion_from_yaw(yaw));
    // Compare on the circle so the +-pi seam does not matter.
    EXPECT_NEAR(std::remainder(got - wrap_angle(yaw), 2 * kPi), 0.0, 1e-9);
  }
}

TEST(WrapAngle, RangeAndPeriodicity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const double theta = dist(rng);
    const double w = wrap_angle(theta);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    for (int k = -10; k <= 10; ++k) {
      const double shifted = wrap_angle(theta + 2 * kPi * k);
      EXPECT_GT(shifted, -kPi);
      EXPECT_LE(shifted, kPi);
      EXPECT_NEAR(std::remainder(shifted - w, 2 * kPi), 0.0, 1e-9);
    }
  }
}

TEST(WrapAngle, Boundaries) {
  EXPECT_EQ(wrap_angle(kPi), kPi);
  EXPECT_EQ(wrap_angle(-kPi), kPi);
  EXPECT_EQ(wrap_angle(0.0), 0.0);
  EXPECT_NEAR(wrap_angle(3 * kPi / 2), -kPi / 2, 1e-12);
  // Values already in range come back untouched.
  EXPECT_EQ(wrap_angle(1.2345), 1.2345);
  EXPECT_EQ(wrap_angle(-3.0), -3.0);
}

TEST(ConvertLength, ExactRatios) {
  EXPECT_EQ(convert_length(150, LengthUnit::kCentimeter), 1.5);
  EXPECT_EQ(convert_length(1, LengthUnit::kMeter), 1.0);
  EXPECT_EQ(convert_length(0.5, LengthUnit::kKilometer), 500.0);
  EXPECT_EQ(convert_length(250, LengthUnit::kMillimeter), 0.25);
}

TEST(ConvertSpeed, ExactRatios) {
  EXPECT_NEAR(convert_speed(2, SpeedUnit::kKilometersPerHour), 2.0 / 3.6, 1e-15);
  EXPECT_NEAR(convert_speed(2, SpeedUnit::kKilometersPerHour), 0.5556, 1e-3);
  EXPECT_EQ(convert_speed(0.5, SpeedUnit::kMetersPerSecond), 0.5);
  EXPECT_EQ(convert_speed(30, SpeedUnit::kCentimetersPerSecond), 0.3);
}

TEST(Conversions, RoundTripIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(0.0, 1000.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = dist(rng);
    for (auto u : {LengthUnit::kMeter, LengthUnit::kCentimeter, LengthUnit::kMillimeter,
                   LengthUnit::kKilometer}) {
      const double back = length_in_unit(convert_length(v, u), u);
      EXPECT_NEAR(back, v, 1e-12 * std::max(1.0, v));
    }
    for (auto u : {SpeedUnit::kMetersPerSecond, SpeedUnit::kKilometersPerHour,
                   SpeedUnit::kCentimetersPerSecond}) {
      const double back = speed_in_unit(convert_speed(v, u), u);
      EXPECT_NEAR(back, v, 1e-12 * std::max(1.0, v));
    }
  }
}

TEST(UnitParsing, SymbolsAndNames) {
  EXPECT_EQ(parse_length_unit("cm"), LengthUnit::kCentimeter);
  EXPECT_EQ(parse_length_unit("Kilometres"), LengthUnit::kKilometer);
  EXPECT_EQ(parse_speed_unit("km/h"), SpeedUnit::kKilometersPerHour);
  EXPECT_EQ(parse_speed_unit("meters  per second"), SpeedUnit::kMetersPerSecond);
  EXPECT_EQ(parse_speed_unit("cm/s"), SpeedUnit::kCentimetersPerSecond);
}

TEST(UnitParsing, UnknownUnitIsUnitError) {
  try {
    parse_length_unit("furlong");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownUnit);
  }
  EXPECT_THROW(parse_speed_unit("knots"), Error);
  EXPECT_THROW(convert_length(1.0, static_cast<LengthUnit>(42)), Error);
}

TEST(ValidateTwist, RejectsOverLimitAndNonFinite) {
  EXPECT_NO_THROW(validate_twist({2.0, -4.0}));
  try {
    validate_twist({2.5, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVelocityLimit);
  }
  EXPECT_THROW(validate_twist({0, 4.01}), Error);
  try {
    validate_twist({std::nan(""), 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteCommand);
  }
}

TEST(ValidateIntent, SpeedMustBePositive) {
  EXPECT_NO_THROW(validate_intent(CommandIntent::move(-1, 0.1)));
  EXPECT_THROW(validate_intent(CommandIntent::move(1, 0)), Error);
  EXPECT_THROW(validate_intent(CommandIntent::rotate(90, -0.5)), Error);
  EXPECT_THROW(validate_intent(CommandIntent::rotate(std::nan(""), 0.5)), Error);
}
