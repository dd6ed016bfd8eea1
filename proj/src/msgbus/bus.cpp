#include "teleop/msgbus.hpp"

#include <algorithm>
#include <exception>
#include <utility>

namespace teleop::bus {

namespace detail {

struct Subscriber {
  Bus::Handler handler;
  std::size_t depth = kDefaultQueueDepth;

  std::mutex mutex;
  std::condition_variable idle;
  std::deque<Message> queue;
  bool draining = false;
  bool cancelled = false;
  std::thread::id drainer;

  // Runs queued messages until the queue is empty. Only one thread drains
  // at a time; others return immediately and leave their message queued.
  void drain() {
    std::unique_lock lock(mutex);
    if (draining || cancelled) return;
    draining = true;
    drainer = std::this_thread::get_id();
    while (!queue.empty() && !cancelled) {
      Message m = std::move(queue.front());
      queue.pop_front();
      lock.unlock();
      try {
        handler(m);
      } catch (...) {
        lock.lock();
        draining = false;
        drainer = {};
        idle.notify_all();
        throw;
      }
      lock.lock();
    }
    draining = false;
    drainer = {};
    idle.notify_all();
  }
};

struct TopicState {
  std::string name;
  PayloadKind kind;
  std::mutex mutex;
  std::vector<std::shared_ptr<Subscriber>> subscribers;
};

}  // namespace detail

std::string_view to_string(PayloadKind kind) {
  return kind == PayloadKind::kTwist ? "Twist" : "ImuSample";
}

PayloadKind kind_of(const Message& message) {
  return std::holds_alternative<Twist>(message) ? PayloadKind::kTwist : PayloadKind::kImu;
}

Subscription& Subscription::operator=(Subscription&& other) noexcept {
  if (this != &other) {
    cancel();
    topic_ = std::move(other.topic_);
    subscriber_ = std::move(other.subscriber_);
  }
  return *this;
}

Subscription::~Subscription() { cancel(); }

bool Subscription::active() const {
  if (!subscriber_) return false;
  std::lock_guard lock(subscriber_->mutex);
  return !subscriber_->cancelled;
}

void Subscription::cancel() {
  if (!subscriber_) return;
  auto sub = std::exchange(subscriber_, nullptr);
  if (auto topic = topic_.lock()) {
    std::lock_guard lock(topic->mutex);
    std::erase(topic->subscribers, sub);
  }
  std::unique_lock lock(sub->mutex);
  sub->cancelled = true;
  sub->queue.clear();
  if (sub->drainer != std::this_thread::get_id()) {
    sub->idle.wait(lock, [&] { return !sub->draining; });
  }
}

Bus::Bus(std::size_t queue_depth) : queue_depth_(queue_depth) {
  if (queue_depth_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "bus queue depth must be positive");
  }
}

void Bus::register_topic(std::string_view name, PayloadKind kind) {
  if (name.empty()) throw Error(ErrorCode::kInvalidArgument, "topic name must be non-empty");
  std::lock_guard lock(mutex_);
  auto it = topics_.find(name);
  if (it != topics_.end()) {
    if (it->second->kind != kind) {
      throw Error(ErrorCode::kTypeMismatch,
                  "topic '" + std::string(name) + "' already carries " +
                      std::string(to_string(it->second->kind)));
    }
    return;
  }
  auto state = std::make_shared<detail::TopicState>();
  state->name = std::string(name);
  state->kind = kind;
  topics_.emplace(std::string(name), std::move(state));
}

bool Bus::has_topic(std::string_view name) const { return find(name) != nullptr; }

std::shared_ptr<detail::TopicState> Bus::find(std::string_view name) const {
  std::lock_guard lock(mutex_);
  auto it = topics_.find(name);
  return it == topics_.end() ? nullptr : it->second;
}

void Bus::publish(std::string_view name, const Message& message) {
  auto topic = find(name);
  if (!topic) throw Error(ErrorCode::kUnknownTopic, "unknown topic '" + std::string(name) + "'");
  if (kind_of(message) != topic->kind) {
    throw Error(ErrorCode::kTypeMismatch,
                "topic '" + topic->name + "' carries " + std::string(to_string(topic->kind)) +
                    ", got " + std::string(to_string(kind_of(message))));
  }

  std::vector<std::shared_ptr<detail::Subscriber>> targets;
  {
    std::lock_guard topic_lock(topic->mutex);
    targets = topic->subscribers;
    // Check every queue first so a publish is all-or-nothing.
    std::vector<std::unique_lock<std::mutex>> locks;
    locks.reserve(targets.size());
    for (auto& sub : targets) {
      locks.emplace_back(sub->mutex);
      if (!sub->cancelled && sub->queue.size() >= sub->depth) {
        throw Error(ErrorCode::kQueueOverflow,
                    "subscriber queue on '" + topic->name + "' is full");
      }
    }
    for (auto& sub : targets) {
      if (!sub->cancelled) sub->queue.push_back(message);
    }
  }
  // A throwing handler must not starve the remaining subscribers.
  std::exception_ptr failure;
  for (auto& sub : targets) {
    try {
      sub->drain();
    } catch (...) {
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

Subscription Bus::subscribe(std::string_view name, Handler handler) {
  auto topic = find(name);
  if (!topic) throw Error(ErrorCode::kUnknownTopic, "unknown topic '" + std::string(name) + "'");
  if (!handler) throw Error(ErrorCode::kInvalidArgument, "subscription handler is empty");
  auto sub = std::make_shared<detail::Subscriber>();
  sub->handler = std::move(handler);
  sub->depth = queue_depth_;
  {
    std::lock_guard lock(topic->mutex);
    topic->subscribers.push_back(sub);
  }
  return Subscription(topic, std::move(sub));
}

std::size_t Bus::subscriber_count(std::string_view name) const {
  auto topic = find(name);
  if (!topic) return 0;
  std::lock_guard lock(topic->mutex);
  return topic->subscribers.size();
}

}  // namespace teleop::bus
