#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "teleop/clock.hpp"
#include "teleop/core.hpp"
#include "teleop/msgbus.hpp"

namespace teleop::sim {

enum class Pacing {
  kFast,      // advanced explicitly (tests, bench, scripted runs)
  kRealTime,  // own thread, paced against the wall clock
};

struct SimConfig {
  double dt = 0.01;        // s
  double imu_rate = 100.0; // Hz
  RobotPose initial{};
  Pacing pacing = Pacing::kFast;
};

void validate(const SimConfig& config);

/// One Euler step of the unicycle model. Throws kNonFiniteCommand for a
/// non-finite command and kInvalidArgument for dt <= 0.
RobotPose step(const RobotPose& pose, const Twist& cmd, double dt);

/// Kinematic differential-drive robot on the bus: listens on `cmd_vel`,
/// publishes orientation on `imu/data`. The last accepted command is held
/// until replaced.
class Simulator {
 public:
  Simulator(bus::Bus& bus, SimConfig config = {});
  ~Simulator();
  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  /// Subscribes to cmd_vel, publishes the initial IMU sample and, in
  /// real-time mode, starts the pacing thread. Throws kAlreadyRunning.
  void start();
  void stop();
  void pause();
  void resume();

  bool running() const { return running_.load(); }
  bool paused() const { return paused_.load(); }

  /// Advances exactly one dt. No-op when stopped or paused.
  void step_once();
  void advance_to(double sim_time);
  void advance(double seconds) { advance_to(time() + seconds); }

  RobotPose pose() const;
  double time() const;
  std::uint64_t steps() const;
  Twist command() const;
  std::uint64_t imu_published() const { return imu_published_.load(); }
  std::uint64_t rejected_commands() const { return rejected_.load(); }
  std::optional<std::string> last_error() const;
  const SimConfig& config() const { return config_; }

 private:
  void on_command(const Twist& cmd);
  void publish_imu(double stamp, double yaw);
  void pacing_loop();

  bus::Bus& bus_;
  SimConfig config_;
  std::uint64_t steps_per_imu_;

  mutable std::mutex mutex_;
  RobotPose pose_;
  Twist command_{};
  std::uint64_t steps_ = 0;
  std::optional<std::string> last_error_;

  std::mutex step_mutex_;  // serializes step_once callers
  std::atomic<bool> running_{false};
  std::atomic<bool> paused_{false};
  std::atomic<std::uint64_t> imu_published_{0};
  std::atomic<std::uint64_t> rejected_{0};

  std::mutex pace_mutex_;
  std::condition_variable pace_cv_;
  std::thread thread_;
  bus::Subscription cmd_sub_;
};

/// Clock whose waits step the simulator. Time is the simulator's clock.
class SimClock final : public Clock {
 public:
  explicit SimClock(Simulator& sim) : sim_(sim) {}

  double now() const override { return sim_.time(); }
  /// Throws kAborted if the simulator stops or pauses while time is needed.
  void wait_until(double deadline, const std::function<bool()>& ready) override;

 private:
  Simulator& sim_;
};

}  // namespace teleop::sim
