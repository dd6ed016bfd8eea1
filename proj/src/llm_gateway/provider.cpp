#include <cmath>
#include <cstdlib>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "teleop/clock.hpp"
#include "teleop/llm_gateway.hpp"
#include "teleop/url.hpp"

namespace teleop::llm {

using nlohmann::json;

namespace {

std::string strip(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\v\f");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\v\f");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

void validate(const ProviderConfig& config) {
  if (!(std::isfinite(config.timeout) && config.timeout > 0.0)) {
    throw Error(ErrorCode::kConfig, "provider timeout must be positive");
  }
  if (!std::isfinite(config.temperature) || config.temperature < 0.0) {
    throw Error(ErrorCode::kConfig, "temperature must be a non-negative number");
  }
  if (config.model.empty()) throw Error(ErrorCode::kConfig, "model name is empty");
  (void)split_base_url(config.base_url);
}

std::optional<std::string> api_key_from_env(std::string_view var) {
  const char* value = std::getenv(std::string(var).c_str());
  if (value == nullptr || *value == '\0') return std::nullopt;
  return std::string(value);
}

std::string make_request_body(const ProviderConfig& config, const interp::Prompts& prompts) {
  const json body = {
      {"model", config.model},
      {"temperature", config.temperature},
      {"messages",
       json::array({{{"role", "system"}, {"content", prompts.system}},
                    {{"role", "user"}, {"content", prompts.user}}})},
  };
  return body.dump();
}

std::string parse_response_body(std::string_view body) {
  const json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kMalformedResponse, "response body is not a JSON object");
  }
  const auto choices = doc.find("choices");
  if (choices == doc.end() || !choices->is_array() || choices->empty()) {
    throw Error(ErrorCode::kMalformedResponse, "response has no choices");
  }
  const json& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object()) {
    throw Error(ErrorCode::kMalformedResponse, "first choice has no message");
  }
  const json& message = first["message"];
  if (!message.contains("content") || !message["content"].is_string()) {
    throw Error(ErrorCode::kMalformedResponse, "message content is missing");
  }
  return strip(message["content"].get<std::string>());
}

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {
  validate(config_);
  auto url = split_base_url(config_.base_url);
  origin_ = std::move(url.origin);
  path_ = url.prefix + std::string(kCompletionsPath);
}

Completion HttpChatProvider::complete(const interp::Prompts& prompts) {
  const std::string body = make_request_body(config_, prompts);

  httplib::Client client(origin_);
  if (!client.is_valid()) {
    throw ProviderFailure(ErrorCode::kProviderError,
                          "cannot create a client for '" + origin_ + "'", 0.0, 0.0);
  }
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  if (config_.api_key) client.set_bearer_token_auth(*config_.api_key);

  const double t_request = monotonic_seconds();
  auto result = client.Post(path_, body, "application/json");
  const double t_response = monotonic_seconds();

  if (!result) {
    const auto err = result.error();
    const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                           ((err == httplib::Error::Read || err == httplib::Error::Write) &&
                            t_response - t_request >= config_.timeout * 0.99);
    std::ostringstream os;
    os << "request to " << origin_ << " failed after " << (t_response - t_request)
       << " s: " << httplib::to_string(err);
    throw ProviderFailure(timed_out ? ErrorCode::kProviderTimeout : ErrorCode::kProviderError,
                          os.str(), t_request, t_response);
  }
  if (result->status >= 400) {
    std::ostringstream os;
    os << "provider returned HTTP " << result->status;
    throw ProviderFailure(ErrorCode::kProviderError, os.str(), t_request, t_response);
  }
  try {
    return Completion{parse_response_body(result->body), t_request, t_response};
  } catch (const Error& e) {
    throw ProviderFailure(e.code(), e.what(), t_request, t_response);
  }
}

std::string oracle_answer(std::string_view user_content, const interp::DefaultsConfig& defaults) {
  try {
    return interp::format_intent(
        interp::rule_based_interpret(interp::extract_transcript(user_content), defaults));
  } catch (const Error&) {
    return std::string(kUninterpretable);
  }
}

Completion OfflineProvider::complete(const interp::Prompts& prompts) {
  const double t_request = monotonic_seconds();
  std::string content = oracle_answer(prompts.user, defaults_);
  return Completion{std::move(content), t_request, monotonic_seconds()};
}

std::unique_ptr<ChatProvider> make_provider(std::string_view kind, const ProviderConfig& config,
                                            const interp::DefaultsConfig& defaults) {
  if (kind == "offline") return std::make_unique<OfflineProvider>(defaults);
  if (kind == "http") return std::make_unique<HttpChatProvider>(config);
  throw Error(ErrorCode::kConfig, "unknown provider '" + std::string(kind) + "'");
}

}  // namespace teleop::llm
