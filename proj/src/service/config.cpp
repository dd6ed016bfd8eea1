#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "teleop/service.hpp"

namespace teleop::service {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw Error(ErrorCode::kConfig, std::string(key) + ": '" + std::string(v) + "' is not a number");
  }
  return out;
}

long long to_integer(std::string_view key, std::string_view v) {
  long long out = 0;
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size()) {
    throw Error(ErrorCode::kConfig, std::string(key) + ": '" + std::string(v) + "' is not an integer");
  }
  return out;
}

template <typename T>
T choose(std::string_view key, std::string_view v, std::initializer_list<std::pair<const char*, T>> options) {
  std::string names;
  for (const auto& [name, value] : options) {
    if (v == name) return value;
    names += names.empty() ? name : std::string("|") + name;
  }
  throw Error(ErrorCode::kConfig, std::string(key) + ": expected " + names + ", got '" + std::string(v) + "'");
}

using Setter = std::function<void(SessionConfig&, std::string_view key, std::string_view value)>;

template <typename F>
Setter number(F field) {
  return [field](SessionConfig& c, std::string_view k, std::string_view v) { field(c) = to_double(k, v); };
}

template <typename F>
Setter text(F field) {
  return [field](SessionConfig& c, std::string_view, std::string_view v) { field(c) = std::string(v); };
}

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"provider.kind",
       [](SessionConfig& c, std::string_view k, std::string_view v) {
         c.provider_kind = choose<ProviderKind>(
             k, v, {{"mock", ProviderKind::kMock}, {"http", ProviderKind::kHttp}, {"offline", ProviderKind::kOffline}});
       }},
      {"provider.base_url", text([](SessionConfig& c) -> std::string& { return c.provider.base_url; })},
      {"provider.model", text([](SessionConfig& c) -> std::string& { return c.provider.model; })},
      {"provider.timeout", number([](SessionConfig& c) -> double& { return c.provider.timeout; })},
      {"provider.temperature", number([](SessionConfig& c) -> double& { return c.provider.temperature; })},
      {"mock.latency",
       [](SessionConfig& c, std::string_view, std::string_view v) {
         schedule_from_spec(v);
         c.mock_latency = std::string(v);
       }},
      {"sim.dt", number([](SessionConfig& c) -> double& { return c.sim.dt; })},
      {"sim.imu_rate", number([](SessionConfig& c) -> double& { return c.sim.imu_rate; })},
      {"sim.initial_x", number([](SessionConfig& c) -> double& { return c.sim.initial.x; })},
      {"sim.initial_y", number([](SessionConfig& c) -> double& { return c.sim.initial.y; })},
      {"sim.initial_yaw", number([](SessionConfig& c) -> double& { return c.sim.initial.yaw; })},
      {"sim.pacing",
       [](SessionConfig& c, std::string_view k, std::string_view v) {
         c.sim.pacing = choose<sim::Pacing>(k, v, {{"fast", sim::Pacing::kFast}, {"realtime", sim::Pacing::kRealTime}});
       }},
      {"controller.publish_rate", number([](SessionConfig& c) -> double& { return c.controller.publish_rate; })},
      {"controller.yaw_tolerance", number([](SessionConfig& c) -> double& { return c.controller.yaw_tolerance; })},
      {"controller.rotation_timeout_factor",
       number([](SessionConfig& c) -> double& { return c.controller.rotation_timeout_factor; })},
      {"controller.rotation_timeout_slack",
       number([](SessionConfig& c) -> double& { return c.controller.rotation_timeout_slack; })},
      {"controller.sensor_stale_after",
       number([](SessionConfig& c) -> double& { return c.controller.sensor_stale_after; })},
      {"controller.max_linear", number([](SessionConfig& c) -> double& { return c.controller.limits.max_linear; })},
      {"controller.max_angular", number([](SessionConfig& c) -> double& { return c.controller.limits.max_angular; })},
      {"defaults.distance", number([](SessionConfig& c) -> double& { return c.defaults.distance; })},
      {"defaults.angle", number([](SessionConfig& c) -> double& { return c.defaults.angle; })},
      {"defaults.linear_speed", number([](SessionConfig& c) -> double& { return c.defaults.linear_speed; })},
      {"defaults.angular_speed", number([](SessionConfig& c) -> double& { return c.defaults.angular_speed; })},
      {"segmenter.frame", number([](SessionConfig& c) -> double& { return c.segmenter.frame; })},
      {"segmenter.start_threshold", number([](SessionConfig& c) -> double& { return c.segmenter.start_threshold; })},
      {"segmenter.start_frames",
       [](SessionConfig& c, std::string_view k, std::string_view v) {
         c.segmenter.start_frames = static_cast<int>(to_integer(k, v));
       }},
      {"segmenter.end_threshold", number([](SessionConfig& c) -> double& { return c.segmenter.end_threshold; })},
      {"segmenter.silence_duration", number([](SessionConfig& c) -> double& { return c.segmenter.silence_duration; })},
      {"stt.kind",
       [](SessionConfig& c, std::string_view k, std::string_view v) {
         c.transcriber_kind = choose<TranscriberKind>(k, v, {{"mock", TranscriberKind::kMock}, {"http", TranscriberKind::kHttp}});
       }},
      {"stt.manifest",
       [](SessionConfig& c, std::string_view, std::string_view v) { c.transcript_manifest = std::string(v); }},
      {"stt.base_url", text([](SessionConfig& c) -> std::string& { return c.stt.base_url; })},
      {"stt.model", text([](SessionConfig& c) -> std::string& { return c.stt.model; })},
      {"stt.timeout", number([](SessionConfig& c) -> double& { return c.stt.timeout; })},
      {"session.language", text([](SessionConfig& c) -> std::string& { return c.language; })},
      {"session.queue_depth",
       [](SessionConfig& c, std::string_view k, std::string_view v) {
         const long long n = to_integer(k, v);
         if (n < 1) throw Error(ErrorCode::kConfig, "session.queue_depth must be at least 1");
         c.queue_depth = static_cast<std::size_t>(n);
       }},
      {"session.feedback_seed",
       [](SessionConfig& c, std::string_view k, std::string_view v) {
         c.feedback_seed = static_cast<std::uint64_t>(to_integer(k, v));
       }},
      {"session.event_log",
       [](SessionConfig& c, std::string_view, std::string_view v) {
         if (v.empty()) {
           c.event_log.reset();
         } else {
           c.event_log = std::string(v);
         }
       }},
      {"gateway.host", text([](SessionConfig& c) -> std::string& { return c.gateway_host; })},
      {"gateway.port",
       [](SessionConfig& c, std::string_view k, std::string_view v) {
         c.gateway_port = static_cast<int>(to_integer(k, v));
       }},
  };
  return table;
}

}  // namespace

llm::LatencySchedule schedule_from_spec(std::string_view spec) {
  const auto table = bench::bundled_reference_table();
  for (const auto& col : table.columns) {
    if (spec == col.key) return bench::column_schedule(col);
  }
  if (spec.rfind("fixed:", 0) == 0) {
    const std::string_view ms = spec.substr(6);
    double value = 0.0;
    const auto [end, ec] = std::from_chars(ms.data(), ms.data() + ms.size(), value);
    if (ec != std::errc() || end != ms.data() + ms.size() || !(value >= 0.0) || !std::isfinite(value)) {
      throw Error(ErrorCode::kConfig, "fixed latency must be a non-negative number of milliseconds");
    }
    return llm::LatencySchedule(llm::LatencySchedule::Fixed{value / 1000.0});
  }
  try {
    return llm::LatencySchedule::parse(spec);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, std::string("latency schedule: ") + e.what());
  }
}

void validate(const SessionConfig& config) {
  try {
    llm::validate(config.provider);
    sim::validate(config.sim);
    control::validate(config.controller);
    speech::validate(config.segmenter);
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfig, e.what());
  }
  const auto& d = config.defaults;
  if (!(d.distance > 0.0) || !(d.angle > 0.0) || !(d.linear_speed > 0.0) || !(d.angular_speed > 0.0)) {
    throw Error(ErrorCode::kConfig, "defaults must be positive");
  }
  if (config.queue_depth < 1) throw Error(ErrorCode::kConfig, "queue depth must be at least 1");
  if (config.gateway_port < 0 || config.gateway_port > 65535) {
    throw Error(ErrorCode::kConfig, "gateway port out of range");
  }
}

void apply_setting(SessionConfig& config, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw Error(ErrorCode::kConfig, "unknown config key '" + std::string(key) + "'");
  try {
    it->second(config, key, value);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConfig) throw;
    throw Error(ErrorCode::kConfig, std::string(key) + ": " + e.what());
  }
}

SessionConfig parse_config(std::string_view text, SessionConfig base) {
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kConfig, "config line " + std::to_string(number) + ": expected key = value");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfig, "config line " + std::to_string(number) + ": " + e.what());
    }
  }
  validate(base);
  return base;
}

SessionConfig load_config(const std::filesystem::path& path, SessionConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open config '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), std::move(base));
}

}  // namespace teleop::service
