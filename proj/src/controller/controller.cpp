#include "teleop/controller.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

namespace teleop::control {

namespace {

// Tolerance for comparing clock readings against planned deadlines.
constexpr double kTimeEps = 1e-9;

class BusyFlag {
 public:
  explicit BusyFlag(std::atomic<bool>& flag) : flag_(flag) { flag_.store(true); }
  ~BusyFlag() { flag_.store(false); }
  BusyFlag(const BusyFlag&) = delete;
  BusyFlag& operator=(const BusyFlag&) = delete;

 private:
  std::atomic<bool>& flag_;
};

}  // namespace

void validate(const ControllerConfig& config) {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(config.publish_rate) || !positive(config.yaw_tolerance) ||
      !positive(config.rotation_timeout_factor) || !positive(config.sensor_stale_after) ||
      !(config.rotation_timeout_slack >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "controller config values must be positive");
  }
}

YawTracker::YawTracker(bus::Bus& bus, const Clock& clock) : clock_(clock) {
  bus.advertise(bus::kImuData);
  sub_ = bus.subscribe(bus::kImuData, [this](const bus::ImuSample& sample) {
    double yaw = 0.0;
    try {
      yaw = yaw_from_quaternion(sample.orientation);
    } catch (const Error&) {
      return;
    }
    const double now = clock_.now();
    {
      std::lock_guard lock(mutex_);
      yaw_ = yaw;
      received_at_ = now;
    }
    samples_.fetch_add(1);
  });
}

std::optional<double> YawTracker::yaw() const {
  std::lock_guard lock(mutex_);
  return yaw_;
}

std::optional<double> YawTracker::last_sample_time() const {
  std::lock_guard lock(mutex_);
  return received_at_;
}

Controller::Controller(bus::Bus& bus, Clock& clock, ControllerConfig config)
    : bus_(bus), clock_(clock), config_(config), tracker_(bus, clock) {
  validate(config_);
  bus_.advertise(bus::kCmdVel);
}

void Controller::abort() { abort_.store(true); }

void Controller::publish(const Twist& twist) {
  try {
    bus_.publish(bus::kCmdVel, twist);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kBusFailure, std::string("cmd_vel publish failed: ") + e.what());
  }
}

void Controller::publish_stop() { publish(Twist{}); }

template <typename F>
MotionReport Controller::guarded(const CommandIntent& intent, F&& body) {
  std::lock_guard lock(motion_mutex_);
  BusyFlag busy(busy_);
  try {
    validate_intent(intent);
    MotionReport report = body(intent);
    publish_stop();
    return report;
  } catch (...) {
    try {
      publish_stop();
    } catch (...) {
      // The original failure is more useful to the caller.
    }
    throw;
  }
}

MotionReport Controller::execute(const CommandIntent& intent) {
  return intent.action == Action::kMove ? move(intent) : rotate(intent);
}

MotionReport Controller::move(const CommandIntent& intent) {
  if (intent.action != Action::kMove) {
    publish_stop();
    throw Error(ErrorCode::kInvalidIntent, "move() requires a move intent");
  }
  return guarded(intent, [this](const CommandIntent& i) { return run_move(i); });
}

MotionReport Controller::rotate(const CommandIntent& intent) {
  if (intent.action != Action::kRotate) {
    publish_stop();
    throw Error(ErrorCode::kInvalidIntent, "rotate() requires a rotate intent");
  }
  return guarded(intent, [this](const CommandIntent& i) { return run_rotate(i); });
}

MotionReport Controller::run_move(const CommandIntent& intent) {
  MotionReport report;
  report.action = Action::kMove;
  report.commanded = intent.magnitude;
  report.start_yaw = report.achieved_yaw = tracker_.yaw().value_or(0.0);

  const double direction = intent.magnitude < 0.0 ? -1.0 : 1.0;
  const Twist cmd{direction * intent.speed, 0.0};
  validate_twist(cmd, config_.limits);

  report.duration = std::abs(intent.magnitude) / intent.speed;
  if (report.duration == 0.0) return report;

  const double period = 1.0 / config_.publish_rate;
  const double t0 = clock_.now();
  const double end = t0 + report.duration;
  for (std::size_t k = 1;; ++k) {
    if (aborted()) throw Error(ErrorCode::kAborted, "move aborted");
    publish(cmd);
    ++report.publishes;
    const double next = std::min(t0 + static_cast<double>(k) * period, end);
    clock_.wait_until(next, [this] { return aborted(); });
    if (aborted()) throw Error(ErrorCode::kAborted, "move aborted");
    if (clock_.now() >= end - kTimeEps) break;
  }
  report.elapsed = clock_.now() - t0;
  report.achieved_yaw = tracker_.yaw().value_or(report.start_yaw);
  return report;
}

MotionReport Controller::run_rotate(const CommandIntent& intent) {
  MotionReport report;
  report.action = Action::kRotate;
  report.commanded = intent.magnitude;

  const double t0 = clock_.now();
  if (!tracker_.yaw()) {
    clock_.wait_until(t0 + config_.sensor_stale_after,
                      [this] { return aborted() || tracker_.yaw().has_value(); });
    if (aborted()) throw Error(ErrorCode::kAborted, "rotate aborted");
    if (!tracker_.yaw()) {
      throw Error(ErrorCode::kSensorStale, "no IMU sample received before rotation");
    }
  }
  const double yaw0 = *tracker_.yaw();
  report.start_yaw = report.achieved_yaw = yaw0;
  report.target_yaw = wrap_angle(yaw0 + deg_to_rad(intent.magnitude));
  if (intent.magnitude == 0.0) return report;

  const double direction = intent.magnitude < 0.0 ? -1.0 : 1.0;
  const Twist cmd{0.0, direction * intent.speed};
  validate_twist(cmd, config_.limits);

  // Progress is accumulated from wrapped per-sample deltas so rotations
  // across the +-pi seam (or past half a turn) are measured correctly.
  const double goal = std::abs(deg_to_rad(intent.magnitude));
  const double timeout = config_.rotation_timeout_factor * goal / intent.speed +
                         config_.rotation_timeout_slack;
  const double period = 1.0 / config_.publish_rate;

  double progress = 0.0;
  double last_yaw = yaw0;
  std::uint64_t seen = tracker_.samples();

  publish(cmd);
  ++report.publishes;
  double next_publish = t0 + period;

  while (true) {
    if (aborted()) throw Error(ErrorCode::kAborted, "rotate aborted");
    const std::uint64_t count = tracker_.samples();
    if (count != seen) {
      seen = count;
      const double y = tracker_.yaw().value_or(last_yaw);
      progress += direction * wrap_angle(y - last_yaw);
      last_yaw = y;
    }
    if (goal - progress < config_.yaw_tolerance) break;

    const double now = clock_.now();
    if (now - t0 > timeout) {
      std::ostringstream os;
      os << "rotation did not converge within " << timeout << " s";
      throw Error(ErrorCode::kTimeout, os.str());
    }
    const double last_sample = tracker_.last_sample_time().value_or(t0);
    if (now - last_sample > config_.sensor_stale_after) {
      throw Error(ErrorCode::kSensorStale, "IMU stale during rotation");
    }
    if (now >= next_publish - kTimeEps) {
      publish(cmd);
      ++report.publishes;
      next_publish += period;
    }
    const double deadline =
        std::min({next_publish, t0 + timeout + kTimeEps,
                  last_sample + config_.sensor_stale_after + kTimeEps});
    clock_.wait_until(deadline,
                      [this, seen] { return aborted() || tracker_.samples() != seen; });
  }
  report.elapsed = clock_.now() - t0;
  report.achieved_yaw = last_yaw;
  return report;
}

}  // namespace teleop::control
