#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "teleop/core.hpp"

namespace teleop::bus {

struct ImuSample {
  Quaternion orientation;
  double stamp = 0.0;  // monotonic seconds of the publisher's clock

  friend bool operator==(const ImuSample&, const ImuSample&) = default;
};

using Message = std::variant<Twist, ImuSample>;

enum class PayloadKind { kTwist, kImu };

std::string_view to_string(PayloadKind kind);
PayloadKind kind_of(const Message& message);

template <typename T>
constexpr PayloadKind payload_kind_v = std::is_same_v<T, Twist> ? PayloadKind::kTwist
                                                                 : PayloadKind::kImu;

/// Typed topic name. The payload type is part of the handle so the typed
/// publish/subscribe overloads cannot mix kinds.
template <typename T>
struct Topic {
  std::string name;
};

inline const Topic<Twist> kCmdVel{"cmd_vel"};
inline const Topic<ImuSample> kImuData{"imu/data"};

inline constexpr std::size_t kDefaultQueueDepth = 256;

class Bus;

namespace detail {
struct Subscriber;
struct TopicState;
}  // namespace detail

/// RAII subscription handle. Destroying or cancelling it guarantees the
/// handler will not be started again; cancel() also waits for a running
/// invocation to return unless called from inside that handler.
class Subscription {
 public:
  Subscription() = default;
  Subscription(Subscription&&) noexcept = default;
  Subscription& operator=(Subscription&& other) noexcept;
  Subscription(const Subscription&) = delete;
  Subscription& operator=(const Subscription&) = delete;
  ~Subscription();

  void cancel();
  bool active() const;

 private:
  friend class Bus;
  Subscription(std::weak_ptr<detail::TopicState> topic,
               std::shared_ptr<detail::Subscriber> subscriber)
      : topic_(std::move(topic)), subscriber_(std::move(subscriber)) {}

  std::weak_ptr<detail::TopicState> topic_;
  std::shared_ptr<detail::Subscriber> subscriber_;
};

/// In-process topic bus.
///
/// Each subscriber owns a bounded FIFO (default depth 256). A publish
/// enqueues to every current subscriber of the topic under the topic lock
/// (so all subscribers see one global per-topic order), then drains on the
/// publishing thread. A subscriber that is already being drained by another
/// thread, or re-entered from its own handler, is left to the active drainer.
/// Handlers are therefore never run concurrently with themselves, and a full
/// queue fails the publish with kQueueOverflow before anything is delivered.
class Bus {
 public:
  using Handler = std::function<void(const Message&)>;

  explicit Bus(std::size_t queue_depth = kDefaultQueueDepth);
  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  /// Idempotent for the same kind; a different kind throws kTypeMismatch.
  void register_topic(std::string_view name, PayloadKind kind);
  bool has_topic(std::string_view name) const;

  void publish(std::string_view topic, const Message& message);
  Subscription subscribe(std::string_view topic, Handler handler);

  template <typename T>
  void advertise(const Topic<T>& topic) {
    register_topic(topic.name, payload_kind_v<T>);
  }

  template <typename T>
  void publish(const Topic<T>& topic, const T& message) {
    publish(topic.name, Message{message});
  }

  template <typename T, typename F>
  Subscription subscribe(const Topic<T>& topic, F&& handler) {
    return subscribe(topic.name,
                     [h = std::forward<F>(handler)](const Message& m) { h(std::get<T>(m)); });
  }

  std::size_t subscriber_count(std::string_view topic) const;

 private:
  std::shared_ptr<detail::TopicState> find(std::string_view name) const;

  std::size_t queue_depth_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<detail::TopicState>, std::less<>> topics_;
};

/// Test/diagnostic helper: records every message seen on a topic.
template <typename T>
class Recorder {
 public:
  Recorder(Bus& bus, const Topic<T>& topic)
      : subscription_(bus.subscribe(topic, [this](const T& m) {
          std::lock_guard lock(mutex_);
          messages_.push_back(m);
        })) {}

  std::vector<T> messages() const {
    std::lock_guard lock(mutex_);
    return messages_;
  }
  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return messages_.size();
  }
  std::optional<T> last() const {
    std::lock_guard lock(mutex_);
    if (messages_.empty()) return std::nullopt;
    return messages_.back();
  }
  void clear() {
    std::lock_guard lock(mutex_);
    messages_.clear();
  }

 private:
  mutable std::mutex mutex_;
  std::vector<T> messages_;
  Subscription subscription_;
};

}  // namespace teleop::bus
