#include "teleop/clock.hpp"

#include <algorithm>
#include <thread>

namespace teleop {

SteadyClock::SteadyClock(std::chrono::microseconds poll)
    : origin_(std::chrono::steady_clock::now()), poll_(poll) {}

double SteadyClock::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
}

void SteadyClock::wait_until(double deadline, const std::function<bool()>& ready) {
  while (!ready()) {
    const double remaining = deadline - now();
    if (remaining <= 0.0) return;
    const auto step = std::min<std::chrono::duration<double>>(
        std::chrono::duration<double>(remaining), poll_);
    std::this_thread::sleep_for(step);
  }
}

double monotonic_seconds() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace teleop
