#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <variant>
#include <vector>

#include "teleop/core.hpp"
#include "teleop/interpreter.hpp"

namespace httplib {
class Server;
}

namespace teleop::llm {

inline constexpr std::string_view kApiKeyEnv = "OPENAI_API_KEY";
inline constexpr std::string_view kCompletionsPath = "/v1/chat/completions";
/// Content the mock answers with when the oracle cannot interpret a request.
inline constexpr std::string_view kUninterpretable = "uninterpretable";

struct ProviderConfig {
  std::string base_url = "http://127.0.0.1:8080";
  std::optional<std::string> api_key;
  std::string model = "gpt-3.5-turbo";
  double timeout = 30.0;  // s
  double temperature = 0.0;
};

void validate(const ProviderConfig& config);

/// Reads the key from the environment. The value is never logged.
std::optional<std::string> api_key_from_env(std::string_view var = kApiKeyEnv);

/// One model answer with the monotonic stamps taken right before the request
/// was sent and right after the full response body arrived.
struct Completion {
  std::string content;
  double t_request = 0.0;
  double t_response = 0.0;

  double latency() const { return t_response - t_request; }
};

/// Provider failure that still carries its timing, so a timed-out request
/// reports how long it waited.
class ProviderFailure : public Error {
 public:
  ProviderFailure(ErrorCode code, const std::string& message, double t_request, double t_response)
      : Error(code, message), t_request_(t_request), t_response_(t_response) {}

  double t_request() const { return t_request_; }
  double t_response() const { return t_response_; }
  double elapsed() const { return t_response_ - t_request_; }

 private:
  double t_request_;
  double t_response_;
};

/// Per-command benchmark row.
struct LatencyRecord {
  std::string command;
  std::string provider;
  std::string model;
  double t_request = 0.0;
  double t_response = 0.0;
  std::optional<CommandIntent> intent;
  std::optional<ErrorCode> error;
  std::string detail;
  bool success = false;

  double latency() const { return t_response - t_request; }
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;

  /// Returns the stripped first-choice content. Throws ProviderFailure.
  /// Never retries.
  virtual Completion complete(const interp::Prompts& prompts) = 0;

  virtual std::string name() const = 0;
  virtual std::string model() const = 0;
};

/// OpenAI-compatible chat completions over HTTP(S).
class HttpChatProvider final : public ChatProvider {
 public:
  explicit HttpChatProvider(ProviderConfig config);

  Completion complete(const interp::Prompts& prompts) override;
  std::string name() const override { return "http"; }
  std::string model() const override { return config_.model; }
  const ProviderConfig& config() const { return config_; }

 private:
  ProviderConfig config_;
  std::string origin_;  // scheme://host[:port]
  std::string path_;    // path prefix + completions path
};

/// In-process stand-in: the rule-based oracle formatted into the canonical
/// grammar, with no transport at all.
class OfflineProvider final : public ChatProvider {
 public:
  explicit OfflineProvider(interp::DefaultsConfig defaults = {}) : defaults_(defaults) {}

  Completion complete(const interp::Prompts& prompts) override;
  std::string name() const override { return "offline"; }
  std::string model() const override { return "rule-based"; }

 private:
  interp::DefaultsConfig defaults_;
};

/// What the oracle answers for a user message: the canonical line, or
/// kUninterpretable.
std::string oracle_answer(std::string_view user_content, const interp::DefaultsConfig& defaults);

/// Wire helpers, exposed for tests.
std::string make_request_body(const ProviderConfig& config, const interp::Prompts& prompts);
std::string parse_response_body(std::string_view body);

/// Delays the mock applies, one per request in arrival order.
class LatencySchedule {
 public:
  struct Fixed {
    double seconds;
  };
  /// Replayed in order; wraps around after the last entry.
  struct Sequence {
    std::vector<double> seconds;
  };
  struct Uniform {
    double low;
    double high;
    std::uint64_t seed;
  };

  LatencySchedule() : LatencySchedule(Fixed{0.0}) {}
  LatencySchedule(Fixed f);
  LatencySchedule(Sequence s);
  LatencySchedule(Uniform u);
  LatencySchedule(LatencySchedule&& other) noexcept;
  LatencySchedule& operator=(LatencySchedule&& other) noexcept;

  /// "fixed:0.1", "seq:1.15,1.66,...", "uniform:0.5,1.5[,seed]" or "file:<path>"
  /// (one value per line, '#' comments).
  static LatencySchedule parse(std::string_view spec);

  double next();
  void reset();
  std::size_t issued() const;

 private:
  std::variant<Fixed, Sequence, Uniform> kind_;
  mutable std::mutex mutex_;
  std::size_t index_ = 0;
  std::mt19937_64 rng_;
};

struct MockServerConfig {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port
  interp::DefaultsConfig defaults{};
};

/// Local chat-completions server answering from the rule-based oracle after
/// the scheduled delay.
class MockChatServer {
 public:
  explicit MockChatServer(LatencySchedule schedule = {}, MockServerConfig config = {});
  ~MockChatServer();
  MockChatServer(const MockChatServer&) = delete;
  MockChatServer& operator=(const MockChatServer&) = delete;

  void start();
  void stop();
  bool running() const { return running_.load(); }

  int port() const { return port_; }
  std::string base_url() const;
  std::size_t requests_served() const { return served_.load(); }
  std::size_t requests_rejected() const { return rejected_.load(); }
  LatencySchedule& schedule() { return schedule_; }

 private:
  LatencySchedule schedule_;
  MockServerConfig config_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::atomic<bool> running_{false};
  std::atomic<std::size_t> served_{0};
  std::atomic<std::size_t> rejected_{0};
  int port_ = 0;
};

/// "offline" or "http".
std::unique_ptr<ChatProvider> make_provider(std::string_view kind, const ProviderConfig& config,
                                            const interp::DefaultsConfig& defaults = {});

}  // namespace teleop::llm
