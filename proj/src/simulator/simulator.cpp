#include "teleop/simulator.hpp"

#include <algorithm>
#include <cmath>

namespace teleop::sim {

void validate(const SimConfig& config) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
    throw Error(ErrorCode::kInvalidArgument, "sim dt must be positive");
  }
  if (!(config.imu_rate > 0.0) || !std::isfinite(config.imu_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "sim imu_rate must be positive");
  }
  if (!std::isfinite(config.initial.x) || !std::isfinite(config.initial.y) ||
      !std::isfinite(config.initial.yaw)) {
    throw Error(ErrorCode::kInvalidArgument, "sim initial pose must be finite");
  }
}

RobotPose step(const RobotPose& pose, const Twist& cmd, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step dt must be positive");
  if (!std::isfinite(cmd.linear_x) || !std::isfinite(cmd.angular_z)) {
    throw Error(ErrorCode::kNonFiniteCommand, "non-finite velocity command");
  }
  RobotPose next = pose;
  if (cmd.linear_x != 0.0) {
    next.x += cmd.linear_x * std::cos(pose.yaw) * dt;
    next.y += cmd.linear_x * std::sin(pose.yaw) * dt;
  }
  if (cmd.angular_z != 0.0) {
    next.yaw = wrap_angle(pose.yaw + cmd.angular_z * dt);
  }
  return next;
}

Simulator::Simulator(bus::Bus& bus, SimConfig config) : bus_(bus), config_(config) {
  validate(config_);
  steps_per_imu_ = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::llround(1.0 / (config_.imu_rate * config_.dt))));
  pose_ = config_.initial;
  pose_.yaw = wrap_angle(pose_.yaw);
  bus_.advertise(bus::kCmdVel);
  bus_.advertise(bus::kImuData);
}

Simulator::~Simulator() { stop(); }

void Simulator::start() {
  bool expected = false;
  if (!running_.compare_exchange_strong(expected, true)) {
    throw Error(ErrorCode::kAlreadyRunning, "simulator already started");
  }
  cmd_sub_ = bus_.subscribe(bus::kCmdVel, [this](const Twist& cmd) { on_command(cmd); });
  publish_imu(time(), pose().yaw);
  if (config_.pacing == Pacing::kRealTime) {
    thread_ = std::thread([this] { pacing_loop(); });
  }
}

void Simulator::stop() {
  {
    std::lock_guard lock(pace_mutex_);
    if (!running_.exchange(false)) return;
  }
  pace_cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  cmd_sub_.cancel();
  // Wait out a step_once that is mid-publish on another thread.
  std::lock_guard step_lock(step_mutex_);
}

void Simulator::pause() { paused_.store(true); }

void Simulator::resume() {
  {
    std::lock_guard lock(pace_mutex_);
    paused_.store(false);
  }
  pace_cv_.notify_all();
}

void Simulator::on_command(const Twist& cmd) {
  std::lock_guard lock(mutex_);
  if (!std::isfinite(cmd.linear_x) || !std::isfinite(cmd.angular_z)) {
    rejected_.fetch_add(1);
    last_error_ = "rejected non-finite command; holding previous command";
    return;
  }
  command_ = cmd;
}

void Simulator::publish_imu(double stamp, double yaw) {
  bus_.publish(bus::kImuData, bus::ImuSample{quaternion_from_yaw(yaw), stamp});
  imu_published_.fetch_add(1);
}

void Simulator::step_once() {
  std::lock_guard step_lock(step_mutex_);
  if (!running_.load() || paused_.load()) return;
  double stamp = 0.0;
  double yaw = 0.0;
  bool imu_due = false;
  {
    std::lock_guard lock(mutex_);
    pose_ = step(pose_, command_, config_.dt);
    ++steps_;
    stamp = static_cast<double>(steps_) * config_.dt;
    yaw = pose_.yaw;
    imu_due = steps_ % steps_per_imu_ == 0;
  }
  if (imu_due) publish_imu(stamp, yaw);
}

void Simulator::advance_to(double sim_time) {
  const double eps = 1e-9 * config_.dt;
  while (running_.load() && !paused_.load() && time() < sim_time - eps) step_once();
}

RobotPose Simulator::pose() const {
  std::lock_guard lock(mutex_);
  return pose_;
}

double Simulator::time() const {
  std::lock_guard lock(mutex_);
  return static_cast<double>(steps_) * config_.dt;
}

std::uint64_t Simulator::steps() const {
  std::lock_guard lock(mutex_);
  return steps_;
}

Twist Simulator::command() const {
  std::lock_guard lock(mutex_);
  return command_;
}

std::optional<std::string> Simulator::last_error() const {
  std::lock_guard lock(mutex_);
  return last_error_;
}

void Simulator::pacing_loop() {
  using clock = std::chrono::steady_clock;
  const auto period = std::chrono::duration<double>(config_.dt);
  auto anchor = clock::now();
  std::uint64_t anchor_steps = steps();
  std::unique_lock lock(pace_mutex_);
  while (running_.load()) {
    if (paused_.load()) {
      pace_cv_.wait(lock, [&] { return !paused_.load() || !running_.load(); });
      anchor = clock::now();
      anchor_steps = steps();
      continue;
    }
    const auto target =
        anchor + std::chrono::duration_cast<clock::duration>(
                     period * static_cast<double>(steps() - anchor_steps + 1));
    if (pace_cv_.wait_until(lock, target, [&] { return !running_.load() || paused_.load(); })) {
      continue;
    }
    lock.unlock();
    step_once();
    lock.lock();
  }
}

void SimClock::wait_until(double deadline, const std::function<bool()>& ready) {
  const double eps = 1e-9 * sim_.config().dt;
  while (!ready() && sim_.time() < deadline - eps) {
    if (!sim_.running() || sim_.paused()) {
      throw Error(ErrorCode::kAborted, "simulator is not advancing");
    }
    sim_.step_once();
  }
}

}  // namespace teleop::sim
