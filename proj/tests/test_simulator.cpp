#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "teleop/simulator.hpp"

using namespace teleop;
using namespace teleop::sim;

TEST(Step, StraightLineTwoHundredSteps) {
  RobotPose p{};
  for (int i = 0; i < 200; ++i) p = step(p, {0.5, 0.0}, 0.01);
  EXPECT_NEAR(p.x, 1.0, 1e-9);
  EXPECT_EQ(p.y, 0.0);
  EXPECT_EQ(p.yaw, 0.0);
}

TEST(Step, AxisAlignedHeading) {
  const RobotPose p = step({0, 0, kPi / 2}, {1.0, 0.0}, 0.1);
  EXPECT_NEAR(p.x, 0.0, 1e-12);
  EXPECT_NEAR(p.y, 0.1, 1e-12);
}

// Closed form: yaw(t) = omega * t for a pure rotation from zero heading.
TEST(Step, PureRotationMatchesClosedForm) {
  const double dt = 0.01;
  const double omega = 0.5;
  RobotPose p{};
  int n = 0;
  for (; (n + 1) * dt <= kPi + 1e-12; ++n) p = step(p, {0.0, omega}, dt);
  EXPECT_NEAR(p.yaw, kPi / 2, omega * dt);
  EXPECT_NEAR(p.yaw, omega * n * dt, 1e-12);
}

TEST(Step, RejectsNonFiniteAndBadDt) {
  try {
    step({}, {std::numeric_limits<double>::infinity(), 0}, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNonFiniteCommand);
  }
  EXPECT_THROW(step({}, {0.1, 0}, 0.0), Error);
  EXPECT_THROW(step({}, {0.1, 0}, -0.01), Error);
}

TEST(StepProperties, PureRotationKeepsPositionPureTranslationKeepsYaw) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> pos(-10, 10);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> vel(-2, 2);
  for (int i = 0; i < 500; ++i) {
    RobotPose p{pos(rng), pos(rng), ang(rng)};
    p.yaw = wrap_angle(p.yaw);
    const RobotPose r = step(p, {0.0, vel(rng)}, 0.01);
    EXPECT_EQ(r.x, p.x);
    EXPECT_EQ(r.y, p.y);
    const RobotPose t = step(p, {vel(rng), 0.0}, 0.01);
    EXPECT_EQ(t.yaw, p.yaw);
  }
}

TEST(StepProperties, StraightLineDistanceIsExactForConstantInput) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> vel(0.05, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double yaw = ang(rng);
    const double v = vel(rng);
    RobotPose p{0, 0, yaw};
    const int steps = 100 + trial * 7;
    for (int i = 0; i < steps; ++i) p = step(p, {v, 0}, 0.01);
    EXPECT_NEAR(std::hypot(p.x, p.y), v * steps * 0.01, 1e-9);
  }
}

TEST(Simulator, RunsTwistForFiveSimSeconds) {
  bus::Bus bus;
  Simulator sim(bus);
  sim.start();
  bus.publish(bus::kCmdVel, Twist{0.2, 0.0});
  sim.advance(5.0);
  EXPECT_NEAR(sim.time(), 5.0, 1e-9);
  EXPECT_NEAR(sim.pose().x, 1.0, 0.01);
  EXPECT_EQ(sim.steps(), 500u);
}

TEST(Simulator, NoCommandsKeepsInitialPose) {
  bus::Bus bus;
  SimConfig cfg;
  cfg.initial = {1.5, -2.0, 0.75};
  Simulator sim(bus, cfg);
  sim.start();
  sim.advance(3.0);
  EXPECT_EQ(sim.pose(), cfg.initial);
}

TEST(Simulator, StopEndsImuPublishing) {
  bus::Bus bus;
  Simulator sim(bus);
  bus::Recorder<bus::ImuSample> imu(bus, bus::kImuData);
  sim.start();
  sim.advance(0.5);
  EXPECT_EQ(imu.size(), 51u);  // initial sample + 50 steps at 100 Hz
  sim.stop();
  sim.advance(0.5);
  sim.step_once();
  EXPECT_EQ(imu.size(), 51u);
  EXPECT_FALSE(sim.running());
}

TEST(Simulator, DoubleStartIsAnError) {
  bus::Bus bus;
  Simulator sim(bus);
  sim.start();
  try {
    sim.start();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kAlreadyRunning);
  }
}

TEST(Simulator, NonFiniteCommandRejectedPreviousRetained) {
  bus::Bus bus;
  Simulator sim(bus);
  sim.start();
  bus.publish(bus::kCmdVel, Twist{0.3, 0.0});
  bus.publish(bus::kCmdVel, Twist{std::nan(""), 0.0});
  EXPECT_EQ(sim.command(), (Twist{0.3, 0.0}));
  EXPECT_EQ(sim.rejected_commands(), 1u);
  EXPECT_TRUE(sim.last_error().has_value());
  sim.advance(1.0);
  EXPECT_NEAR(sim.pose().x, 0.3, 1e-9);
}

TEST(Simulator, ImuSamplesAreUnitAndMatchYaw) {
  bus::Bus bus;
  Simulator sim(bus);
  std::vector<std::pair<double, double>> checks;  // (sample yaw, sim yaw)
  auto sub = bus.subscribe(bus::kImuData, [&](const bus::ImuSample& s) {
    EXPECT_NEAR(s.orientation.norm(), 1.0, 1e-12);
    checks.emplace_back(yaw_from_quaternion(s.orientation), sim.pose().yaw);
  });
  sim.start();
  bus.publish(bus::kCmdVel, Twist{0.1, 1.3});
  sim.advance(10.0);  // several laps through the +-pi seam
  ASSERT_GT(checks.size(), 900u);
  for (auto [sample, truth] : checks) {
    EXPECT_NEAR(std::remainder(sample - truth, 2 * kPi), 0.0, 1e-9);
  }
}

TEST(Simulator, ImuTimestampsNonDecreasing) {
  bus::Bus bus;
  Simulator sim(bus);
  bus::Recorder<bus::ImuSample> imu(bus, bus::kImuData);
  sim.start();
  sim.advance(1.0);
  const auto samples = imu.messages();
  for (std::size_t i = 1; i < samples.size(); ++i) {
    EXPECT_GE(samples[i].stamp, samples[i - 1].stamp);
  }
}

TEST(Simulator, ImuRateDecimation) {
  bus::Bus bus;
  SimConfig cfg;
  cfg.imu_rate = 20.0;
  Simulator sim(bus, cfg);
  bus::Recorder<bus::ImuSample> imu(bus, bus::kImuData);
  sim.start();
  sim.advance(1.0);
  EXPECT_EQ(imu.size(), 21u);
}

TEST(Simulator, DeterministicTrajectories) {
  auto run = [] {
    bus::Bus bus;
    Simulator sim(bus);
    sim.start();
    std::vector<RobotPose> trace;
    const Twist script[] = {{0.5, 0}, {0, 0.8}, {-0.3, 0.2}, {0, -1.1}, {0.4, 0}};
    for (const auto& cmd : script) {
      bus.publish(bus::kCmdVel, cmd);
      for (int i = 0; i < 137; ++i) {
        sim.step_once();
        trace.push_back(sim.pose());
      }
    }
    return trace;
  };
  const auto a = run();
  const auto b = run();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
}

TEST(Simulator, InvalidConfigRejected) {
  bus::Bus bus;
  SimConfig cfg;
  cfg.dt = 0.0;
  EXPECT_THROW(Simulator(bus, cfg), Error);
  cfg = {};
  cfg.imu_rate = -1;
  EXPECT_THROW(Simulator(bus, cfg), Error);
}

TEST(Simulator, RealTimePacingAdvancesWithWallClockAndPauses) {
  bus::Bus bus;
  SimConfig cfg;
  cfg.pacing = Pacing::kRealTime;
  Simulator sim(bus, cfg);
  sim.start();
  bus.publish(bus::kCmdVel, Twist{1.0, 0.0});
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  const double t = sim.time();
  EXPECT_GT(t, 0.15);
  EXPECT_LT(t, 0.6);
  sim.pause();
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  const auto frozen = sim.steps();
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  EXPECT_EQ(sim.steps(), frozen);
  sim.resume();
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  EXPECT_GT(sim.steps(), frozen);
  sim.stop();
  EXPECT_NEAR(sim.pose().x, sim.time() * 1.0, 0.02);
}

TEST(SimClock, WaitUntilStepsSimulator) {
  bus::Bus bus;
  Simulator sim(bus);
  SimClock clock(sim);
  sim.start();
  clock.sleep_until(0.25);
  EXPECT_NEAR(clock.now(), 0.25, 1e-9);
  int calls = 0;
  clock.wait_until(10.0, [&] { return ++calls >= 3; });
  EXPECT_NEAR(clock.now(), 0.27, 1e-9);
  sim.stop();
  EXPECT_THROW(clock.sleep_until(1.0), Error);
}
