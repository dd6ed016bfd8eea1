#include <charconv>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "teleop/interpreter.hpp"

namespace teleop::interp {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

// Whitespace split with Python str.split() semantics (runs collapse, no
// empty tokens).
std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

double parse_field(std::string_view token, std::string_view field) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorCode::kNonNumeric,
                std::string(field) + " '" + std::string(token) + "' is not a finite number");
  }
  return value;
}

std::string quoted_prefix(std::string_view content) {
  constexpr std::size_t kMax = 60;
  std::string s(content.substr(0, kMax));
  if (content.size() > kMax) s += "...";
  return "'" + s + "'";
}

}  // namespace

std::string format_number(double value, bool force_fraction) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  std::string out(buf, ptr);
  if (force_fraction && out.find_first_not_of("-0123456789") == std::string::npos) {
    out += ".0";
  }
  return out;
}

CommandIntent parse_response(std::string_view content) {
  const auto words = split_words(content);
  if (words.empty()) throw Error(ErrorCode::kUnparseable, "empty response");

  if (words[0] == "move") {
    if (words.size() != 7) {
      throw Error(ErrorCode::kWrongArity, "move response needs 7 words, got " +
                                              std::to_string(words.size()) + ": " +
                                              quoted_prefix(content));
    }
    const std::string_view direction = words[1];
    double meters = parse_field(words[2], "distance");
    const double speed = parse_field(words[6], "speed");
    if (direction != "forward" && direction != "back") {
      throw Error(ErrorCode::kUnknownDirection,
                  "unknown move direction '" + std::string(direction) + "'");
    }
    if (meters < 0.0) throw Error(ErrorCode::kNegativeMagnitude, "distance must not be negative");
    if (speed <= 0.0) throw Error(ErrorCode::kNonPositiveSpeed, "speed must be positive");
    if (direction == "back") meters = -meters;
    return CommandIntent::move(meters, speed);
  }

  if (words[0] == "rotate") {
    if (words.size() != 10) {
      throw Error(ErrorCode::kWrongArity, "rotate response needs 10 words, got " +
                                              std::to_string(words.size()) + ": " +
                                              quoted_prefix(content));
    }
    const std::string_view direction = words[3];
    double angle = parse_field(words[4], "angle");
    const double angular_speed = parse_field(words[9], "angular speed");
    if (direction != "clockwise" && direction != "counterclockwise") {
      throw Error(ErrorCode::kUnknownDirection,
                  "unknown rotation direction '" + std::string(direction) + "'");
    }
    if (angle < 0.0) throw Error(ErrorCode::kNegativeMagnitude, "angle must not be negative");
    if (angular_speed <= 0.0) {
      throw Error(ErrorCode::kNonPositiveSpeed, "angular speed must be positive");
    }
    if (direction == "clockwise") angle = -angle;
    return CommandIntent::rotate(angle, angular_speed);
  }

  throw Error(ErrorCode::kUnparseable, "response does not start with move or rotate: " +
                                           quoted_prefix(content));
}

std::string format_intent(const CommandIntent& intent) {
  validate_intent(intent);
  std::ostringstream os;
  const bool negative = std::signbit(intent.magnitude) && intent.magnitude != 0.0;
  const double magnitude = std::abs(intent.magnitude);
  if (intent.action == Action::kMove) {
    os << "move " << (negative ? "back" : "forward") << ' ' << format_number(magnitude, true)
       << " meters at speed " << format_number(intent.speed, true);
  } else {
    os << "rotate in direction " << (negative ? "clockwise" : "counterclockwise") << ' '
       << format_number(magnitude, false) << " degrees with angular speed "
       << format_number(intent.speed, true);
  }
  return os.str();
}

}  // namespace teleop::interp
