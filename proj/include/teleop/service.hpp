#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include <json.hpp>

#include "teleop/bench.hpp"
#include "teleop/clock.hpp"
#include "teleop/controller.hpp"
#include "teleop/core.hpp"
#include "teleop/interpreter.hpp"
#include "teleop/llm_gateway.hpp"
#include "teleop/msgbus.hpp"
#include "teleop/simulator.hpp"
#include "teleop/speech.hpp"

namespace teleop::service {

using Json = nlohmann::json;

/// Per-command events, emitted in this order. A command's stream is a
/// subsequence of it and holds exactly one of kMotionCompleted or kError.
enum class EventKind {
  kTranscriptReceived,
  kIntentParsed,
  kMotionStarted,
  kMotionCompleted,
  kError,
  kFeedbackMessage,
  kLatencySample,
};

std::string_view to_string(EventKind kind);

struct SessionEvent {
  std::uint64_t seq = 0;  // session-wide emission order
  std::uint64_t command_id = 0;
  EventKind kind = EventKind::kError;
  double timestamp = 0.0;  // monotonic s
  Json payload = Json::object();
};

Json to_json(const SessionEvent& event);
Json to_json(const RobotPose& pose);
Json to_json(const CommandIntent& intent);

/// One consumer's FIFO view of the event stream. Drops the oldest event
/// when a slow consumer falls `capacity` behind.
class EventStream {
 public:
  explicit EventStream(std::size_t capacity = 4096) : capacity_(capacity) {}

  void push(const SessionEvent& event);
  std::optional<SessionEvent> pop(std::chrono::milliseconds timeout);
  std::vector<SessionEvent> drain();
  void close();
  bool closed() const;
  std::uint64_t dropped() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<SessionEvent> queue_;
  std::size_t capacity_;
  std::uint64_t dropped_ = 0;
  bool closed_ = false;
};

enum class ProviderKind { kMock, kHttp, kOffline };
enum class TranscriberKind { kMock, kHttp };

struct SessionConfig {
  ProviderKind provider_kind = ProviderKind::kMock;
  llm::ProviderConfig provider{};
  std::string mock_latency = "fixed:0";  // schedule_from_spec() for the embedded mock
  sim::SimConfig sim{};
  control::ControllerConfig controller{};
  interp::DefaultsConfig defaults{};
  speech::SegmenterConfig segmenter{};
  TranscriberKind transcriber_kind = TranscriberKind::kMock;
  std::optional<std::filesystem::path> transcript_manifest;
  speech::HttpTranscriberConfig stt{};
  std::string language = "en-US";
  std::size_t queue_depth = 16;
  std::uint64_t feedback_seed = 0;
  std::optional<std::filesystem::path> event_log;  // append-only JSONL
  std::string gateway_host = "127.0.0.1";
  int gateway_port = 8000;
};

void validate(const SessionConfig& config);

/// `key = value` lines, '#' comments. Unknown keys and bad values throw
/// kConfig naming the line.
SessionConfig parse_config(std::string_view text, SessionConfig base = {});
SessionConfig load_config(const std::filesystem::path& path, SessionConfig base = {});
/// Applies a single `key=value`, as from a command-line override.
void apply_setting(SessionConfig& config, std::string_view key, std::string_view value);

/// Operator-facing latency schedule: a reference column name (gpt35, gpt4,
/// rosgpt), `fixed:<ms>`, or a `seq:`/`uniform:`/`file:` spec in seconds.
llm::LatencySchedule schedule_from_spec(std::string_view spec);

struct StateSnapshot {
  RobotPose pose;
  double yaw_deg = 0.0;
  bool busy = false;  // a command is being processed
  bool moving = false;  // the controller is publishing
  std::optional<CommandIntent> last_intent;
  double sim_time = 0.0;
  std::size_t pending = 0;
  bool running = false;
};

Json to_json(const StateSnapshot& state);

struct Metrics {
  std::size_t submitted = 0;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::optional<bench::Stats> latency;  // over provider round trips
  std::vector<double> recent;           // last latencies, oldest first
};

Json to_json(const Metrics& metrics);

/// Runs simulator, controller and interpreter behind a FIFO command queue.
class Session {
 public:
  explicit Session(SessionConfig config = {});
  /// Takes over the provider and transcriber instead of building them.
  Session(SessionConfig config, std::unique_ptr<llm::ChatProvider> provider,
          std::unique_ptr<speech::Transcriber> transcriber = nullptr);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void start();
  /// Publishes a stop Twist, cancels pending commands with Error events,
  /// stops the simulator and closes every stream. Idempotent.
  void shutdown();
  bool running() const { return running_.load(); }

  /// Throws kQueueFull when the queue is at depth, kShutdown when stopped.
  std::uint64_t submit_command(std::string text);
  std::uint64_t submit_audio(speech::AudioClip clip);

  StateSnapshot state_snapshot() const;
  Metrics metrics() const;
  std::vector<llm::LatencyRecord> latency_records() const;

  std::shared_ptr<EventStream> subscribe();
  /// Blocks until the queue is empty and nothing is in flight.
  bool wait_idle(std::chrono::milliseconds timeout) const;

  const SessionConfig& config() const { return config_; }
  bus::Bus& bus() { return bus_; }
  sim::Simulator& simulator() { return *sim_; }
  const llm::ChatProvider& provider() const { return *provider_; }
  std::string provider_url() const;

 private:
  struct Job {
    std::uint64_t id = 0;
    std::variant<std::string, speech::AudioClip> input;
  };

  std::uint64_t enqueue(std::variant<std::string, speech::AudioClip> input);
  void worker_loop();
  void process(Job& job);
  void run_text(std::uint64_t id, const std::string& text);
  void emit(std::uint64_t id, EventKind kind, Json payload);
  void emit_error(std::uint64_t id, ErrorCode code, const std::string& message);
  void record_latency(llm::LatencyRecord record, std::uint64_t id);
  std::size_t terminal_count() const;

  SessionConfig config_;
  bus::Bus bus_;
  std::unique_ptr<llm::MockChatServer> mock_;
  std::unique_ptr<llm::ChatProvider> provider_;
  std::unique_ptr<speech::Transcriber> transcriber_;
  std::unique_ptr<sim::Simulator> sim_;
  std::unique_ptr<Clock> clock_;
  std::unique_ptr<control::Controller> controller_;
  speech::FeedbackSelector feedback_;

  mutable std::mutex queue_mutex_;
  mutable std::condition_variable queue_cv_;
  std::deque<Job> queue_;
  bool in_flight_ = false;
  bool stopping_ = false;
  std::uint64_t next_id_ = 1;
  std::thread worker_;

  mutable std::mutex state_mutex_;
  std::optional<CommandIntent> last_intent_;
  std::vector<llm::LatencyRecord> records_;
  std::size_t submitted_ = 0;
  std::size_t completed_ = 0;
  std::size_t failed_ = 0;

  std::mutex event_mutex_;  // orders emission across streams and the log
  std::uint64_t next_seq_ = 1;
  std::vector<std::weak_ptr<EventStream>> streams_;
  bool streams_closed_ = false;
  std::ofstream log_;

  std::mutex lifecycle_mutex_;
  std::atomic<bool> running_{false};
  bool shut_down_ = false;
};

struct GatewayConfig {
  std::string host = "127.0.0.1";
  int port = 0;              // 0 picks a free port
  double pose_rate = 20.0;   // Hz cap for pose pushes on the stream
};

/// HTTP + WebSocket front end:
///   POST /api/command {"text"}  -> {"command_id"}
///   POST /api/audio   (WAV body) -> {"command_id"}
///   GET  /api/state              -> snapshot
///   GET  /api/metrics            -> latency stats
///   WS   /api/stream             -> {"type":"event",...} and {"type":"pose",...}
class Gateway {
 public:
  Gateway(Session& session, GatewayConfig config = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  void start();
  void stop();
  bool running() const;
  int port() const;

  struct Impl;

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace teleop::service
