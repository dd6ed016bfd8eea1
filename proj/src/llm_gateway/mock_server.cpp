#include <chrono>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "teleop/llm_gateway.hpp"

namespace teleop::llm {

using nlohmann::json;

namespace {

std::string error_body(const std::string& message) {
  return json{{"error", {{"message", message}, {"type", "invalid_request_error"}}}}.dump();
}

// Returns the last user message content, or an error description.
std::variant<std::string, std::string> user_content(const json& doc) {
  using Result = std::variant<std::string, std::string>;
  if (!doc.is_object()) return Result(std::in_place_index<1>, "body must be a JSON object");
  const auto messages = doc.find("messages");
  if (messages == doc.end() || !messages->is_array()) {
    return Result(std::in_place_index<1>, "'messages' must be an array");
  }
  if (messages->empty()) return Result(std::in_place_index<1>, "'messages' is empty");
  std::optional<std::string> user;
  for (const json& m : *messages) {
    if (!m.is_object() || !m.contains("role") || !m["role"].is_string() ||
        !m.contains("content") || !m["content"].is_string()) {
      return Result(std::in_place_index<1>, "each message needs string 'role' and 'content'");
    }
    if (m["role"] == "user") user = m["content"].get<std::string>();
  }
  if (!user) return Result(std::in_place_index<1>, "no user message");
  return Result(std::in_place_index<0>, *user);
}

}  // namespace

MockChatServer::MockChatServer(LatencySchedule schedule, MockServerConfig config)
    : schedule_(std::move(schedule)), config_(std::move(config)) {}

MockChatServer::~MockChatServer() { stop(); }

void MockChatServer::start() {
  if (running_.load()) throw Error(ErrorCode::kAlreadyRunning, "mock server already running");
  server_ = std::make_unique<httplib::Server>();

  server_->Post(std::string(kCompletionsPath), [this](const httplib::Request& req,
                                                     httplib::Response& res) {
    const auto arrived = std::chrono::steady_clock::now();
    const json doc = json::parse(req.body, nullptr, false);
    const auto content = doc.is_discarded()
                             ? std::variant<std::string, std::string>(std::in_place_index<1>,
                                                                      "body is not valid JSON")
                             : user_content(doc);
    if (content.index() == 1) {
      rejected_.fetch_add(1);
      res.status = 400;
      res.set_content(error_body(std::get<1>(content)), "application/json");
      return;
    }
    const double delay = schedule_.next();
    const std::string answer = oracle_answer(std::get<0>(content), config_.defaults);
    std::this_thread::sleep_until(arrived + std::chrono::duration_cast<std::chrono::nanoseconds>(
                                                std::chrono::duration<double>(delay)));
    const std::size_t n = served_.fetch_add(1) + 1;
    const json body = {
        {"id", "mock-" + std::to_string(n)},
        {"object", "chat.completion"},
        {"created", 0},
        {"model", doc.value("model", std::string("mock"))},
        {"choices",
         json::array({{{"index", 0},
                       {"message", {{"role", "assistant"}, {"content", answer}}},
                       {"finish_reason", "stop"}}})},
    };
    res.set_content(body.dump(), "application/json");
  });

  if (config_.port == 0) {
    port_ = server_->bind_to_any_port(config_.host);
  } else {
    port_ = server_->bind_to_port(config_.host, config_.port) ? config_.port : -1;
  }
  if (port_ <= 0) {
    server_.reset();
    throw Error(ErrorCode::kConfig, "mock server cannot bind " + config_.host);
  }
  running_.store(true);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void MockChatServer::stop() {
  if (!running_.exchange(false)) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

std::string MockChatServer::base_url() const {
  return "http://" + config_.host + ":" + std::to_string(port_);
}

}  // namespace teleop::llm
