#include <sstream>

#include "teleop/interpreter.hpp"

namespace teleop::interp {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\v\f");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\v\f");
  return s.substr(first, last - first + 1);
}

}  // namespace

Prompts build_prompts(std::string_view transcript, const DefaultsConfig& defaults) {
  if (trim(transcript).empty()) {
    throw Error(ErrorCode::kEmptyInput, "transcript is empty");
  }

  std::ostringstream sys;
  sys << "You are an assistant that interprets spoken commands for a differential-drive "
         "mobile robot. The robot can do exactly two things: move in a straight line "
         "forward or back, or rotate in place clockwise or counterclockwise.\n"
      << "Rules:\n"
      << "- Convert every distance to meters and every linear speed to meters per second "
         "(m/s). Convert angles to degrees and angular speeds to radians per second.\n"
      << "- Turning right means clockwise. Turning left means counterclockwise.\n"
      << "- When a value is missing use these defaults: distance "
      << format_number(defaults.distance, true) << " meters, linear speed "
      << format_number(defaults.linear_speed, true) << " m/s, angle "
      << format_number(defaults.angle, false) << " degrees, angular speed "
      << format_number(defaults.angular_speed, true) << " rad/s.\n"
      << "- Answer with exactly one line in one of these two formats:\n"
      << "move <forward|back> <distance> meters at speed <speed>\n"
      << "rotate in direction <clockwise|counterclockwise> <angle> degrees with angular "
         "speed <angular speed>\n"
      << "- Numbers are plain non-negative decimals. Do not add any other words, quotation "
         "marks or a full stop.";

  std::ostringstream user;
  user << "Interpret the following sentence and extract the values needed to control the "
          "robot. Reply only with the formatted line, without quotation marks or a full "
          "stop.\n"
       << kTranscriptMarker << transcript;

  return {sys.str(), user.str()};
}

std::string extract_transcript(std::string_view user_content) {
  const auto pos = user_content.find(kTranscriptMarker);
  if (pos == std::string_view::npos) return std::string(trim(user_content));
  return std::string(trim(user_content.substr(pos + kTranscriptMarker.size())));
}

}  // namespace teleop::interp
