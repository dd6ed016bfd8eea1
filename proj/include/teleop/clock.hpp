#pragma once

#include <chrono>
#include <functional>

namespace teleop {

/// Time source used by the controller. Real runs use SteadyClock; fast
/// simulation uses a clock whose waits advance the simulator instead of
/// sleeping.
class Clock {
 public:
  virtual ~Clock() = default;

  /// Monotonic seconds.
  virtual double now() const = 0;

  /// Returns once `ready()` holds or `now() >= deadline`. `ready` is checked
  /// at least once before any waiting happens.
  virtual void wait_until(double deadline, const std::function<bool()>& ready) = 0;

  void sleep_until(double deadline) {
    wait_until(deadline, [] { return false; });
  }
};

class SteadyClock final : public Clock {
 public:
  explicit SteadyClock(std::chrono::microseconds poll = std::chrono::microseconds(500));

  double now() const override;
  void wait_until(double deadline, const std::function<bool()>& ready) override;

 private:
  std::chrono::steady_clock::time_point origin_;
  std::chrono::microseconds poll_;
};

/// Seconds on the process-wide steady clock. Used for latency stamps.
double monotonic_seconds();

}  // namespace teleop
