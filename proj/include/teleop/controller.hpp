#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>

#include "teleop/clock.hpp"
#include "teleop/core.hpp"
#include "teleop/msgbus.hpp"

namespace teleop::control {

struct ControllerConfig {
  double publish_rate = 10.0;           // Hz, Twist cadence during motion
  double yaw_tolerance = 0.01;          // rad
  double rotation_timeout_factor = 2.0; // x nominal rotation time
  double rotation_timeout_slack = 1.0;  // s, added to the scaled nominal time
  double sensor_stale_after = 0.5;      // s without an IMU sample
  VelocityLimits limits{};
};

void validate(const ControllerConfig& config);

struct MotionReport {
  Action action = Action::kMove;
  double commanded = 0.0;    // signed meters or signed degrees
  double duration = 0.0;     // planned motion time (move), s
  double elapsed = 0.0;      // measured on the controller clock, s
  std::size_t publishes = 0; // non-stop Twists published
  double start_yaw = 0.0;    // rad
  double target_yaw = 0.0;   // rad (rotate)
  double achieved_yaw = 0.0; // rad
};

/// Latest orientation from `imu/data`, stamped with the receiving clock.
class YawTracker {
 public:
  YawTracker(bus::Bus& bus, const Clock& clock);

  std::optional<double> yaw() const;
  /// Clock time the last valid sample arrived; nullopt before the first.
  std::optional<double> last_sample_time() const;
  std::uint64_t samples() const { return samples_.load(); }

 private:
  const Clock& clock_;
  mutable std::mutex mutex_;
  std::optional<double> yaw_;
  std::optional<double> received_at_;
  std::atomic<std::uint64_t> samples_{0};
  bus::Subscription sub_;
};

/// Executes one CommandIntent at a time. Move is open-loop on time; rotate
/// closes the loop on IMU yaw, evaluated once per received sample. Every
/// call, including failures, ends by publishing a zero Twist.
class Controller {
 public:
  Controller(bus::Bus& bus, Clock& clock, ControllerConfig config = {});

  MotionReport execute(const CommandIntent& intent);
  MotionReport move(const CommandIntent& intent);
  MotionReport rotate(const CommandIntent& intent);

  /// Makes the running motion (and any later one) stop with kAborted until
  /// clear_abort() is called. Safe from any thread.
  void abort();
  void clear_abort() { abort_.store(false); }
  bool aborted() const { return abort_.load(); }

  void publish_stop();
  bool busy() const { return busy_.load(); }
  std::optional<double> yaw() const { return tracker_.yaw(); }
  const ControllerConfig& config() const { return config_; }

 private:
  MotionReport run_move(const CommandIntent& intent);
  MotionReport run_rotate(const CommandIntent& intent);
  void publish(const Twist& twist);
  template <typename F>
  MotionReport guarded(const CommandIntent& intent, F&& body);

  bus::Bus& bus_;
  Clock& clock_;
  ControllerConfig config_;
  YawTracker tracker_;
  std::mutex motion_mutex_;
  std::atomic<bool> busy_{false};
  std::atomic<bool> abort_{false};
};

}  // namespace teleop::control
