#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "teleop/llm_gateway.hpp"

namespace teleop::llm {

namespace {

double parse_seconds(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || !std::isfinite(value) ||
      value < 0.0) {
    throw Error(ErrorCode::kConfig, "bad latency value '" + std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    out.push_back(parse_seconds(text.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

LatencySchedule::LatencySchedule(Fixed f) : kind_(f) {
  if (!std::isfinite(f.seconds) || f.seconds < 0.0) {
    throw Error(ErrorCode::kConfig, "fixed latency must be non-negative");
  }
}

LatencySchedule::LatencySchedule(Sequence s) : kind_(std::move(s)) {
  const auto& values = std::get<Sequence>(kind_).seconds;
  if (values.empty()) throw Error(ErrorCode::kConfig, "latency sequence is empty");
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw Error(ErrorCode::kConfig, "latency sequence values must be non-negative");
    }
  }
}

LatencySchedule::LatencySchedule(Uniform u) : kind_(u), rng_(u.seed) {
  if (!std::isfinite(u.low) || !std::isfinite(u.high) || u.low < 0.0 || u.high < u.low) {
    throw Error(ErrorCode::kConfig, "uniform latency needs 0 <= low <= high");
  }
}

LatencySchedule::LatencySchedule(LatencySchedule&& other) noexcept {
  std::lock_guard lock(other.mutex_);
  kind_ = std::move(other.kind_);
  index_ = other.index_;
  rng_ = other.rng_;
}

LatencySchedule& LatencySchedule::operator=(LatencySchedule&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mutex_, other.mutex_);
    kind_ = std::move(other.kind_);
    index_ = other.index_;
    rng_ = other.rng_;
  }
  return *this;
}

LatencySchedule LatencySchedule::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kConfig, "latency schedule needs a kind: '" + std::string(spec) + "'");
  }
  const auto kind = spec.substr(0, colon);
  const auto rest = spec.substr(colon + 1);
  if (kind == "fixed") return LatencySchedule(Fixed{parse_seconds(rest)});
  if (kind == "seq") return LatencySchedule(Sequence{parse_list(rest)});
  if (kind == "uniform") {
    const auto values = parse_list(rest);
    if (values.size() != 2 && values.size() != 3) {
      throw Error(ErrorCode::kConfig, "uniform schedule is low,high[,seed]");
    }
    const std::uint64_t seed = values.size() == 3 ? static_cast<std::uint64_t>(values[2]) : 0;
    return LatencySchedule(Uniform{values[0], values[1], seed});
  }
  if (kind == "file") {
    std::ifstream in{std::string(rest)};
    if (!in) throw Error(ErrorCode::kConfig, "cannot open schedule file '" + std::string(rest) + "'");
    std::vector<double> values;
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      values.push_back(parse_seconds(line));
    }
    return LatencySchedule(Sequence{std::move(values)});
  }
  throw Error(ErrorCode::kConfig, "unknown latency schedule kind '" + std::string(kind) + "'");
}

double LatencySchedule::next() {
  std::lock_guard lock(mutex_);
  const std::size_t i = index_++;
  if (const auto* f = std::get_if<Fixed>(&kind_)) return f->seconds;
  if (const auto* s = std::get_if<Sequence>(&kind_)) return s->seconds[i % s->seconds.size()];
  const auto& u = std::get<Uniform>(kind_);
  return std::uniform_real_distribution<double>(u.low, u.high)(rng_);
}

void LatencySchedule::reset() {
  std::lock_guard lock(mutex_);
  index_ = 0;
  if (const auto* u = std::get_if<Uniform>(&kind_)) rng_.seed(u->seed);
}

std::size_t LatencySchedule::issued() const {
  std::lock_guard lock(mutex_);
  return index_;
}

}  // namespace teleop::llm
