#pragma once

#include <string>
#include <string_view>

#include "teleop/core.hpp"

namespace teleop::interp {

/// Values the interpreter (and the prompt it sends to a model) fills in
/// when the utterance leaves them out.
struct DefaultsConfig {
  double distance = 1.0;       // m
  double angle = 90.0;         // deg
  double linear_speed = 0.2;   // m/s
  double angular_speed = 0.5;  // rad/s
};

struct Prompts {
  std::string system;
  std::string user;

  friend bool operator==(const Prompts&, const Prompts&) = default;
};

/// The two prompts plus the model's single-line answer.
struct ChatExchange {
  Prompts prompts;
  std::string response_content;
};

/// Marker that precedes the transcript inside the user prompt. The mock
/// server relies on it to recover the transcript.
inline constexpr std::string_view kTranscriptMarker = "Sentence: ";

/// Throws kEmptyInput for a blank transcript.
Prompts build_prompts(std::string_view transcript, const DefaultsConfig& defaults = {});

/// Inverse of the user-prompt template: the text after kTranscriptMarker,
/// or the whole (trimmed) content when the marker is absent.
std::string extract_transcript(std::string_view user_content);

/// Parses the canonical single-line response by word index:
///   move <forward|back> <D> meters at speed <V>
///   rotate in direction <clockwise|counterclockwise> <A> degrees with angular speed <W>
/// Only the indexed tokens are inspected; the filler words merely occupy
/// their positions. Throws kUnparseable, kWrongArity, kNonNumeric,
/// kNegativeMagnitude, kNonPositiveSpeed or kUnknownDirection.
CommandIntent parse_response(std::string_view content);

/// Emits the canonical surface form; parse_response(format_intent(i)) == i.
std::string format_intent(const CommandIntent& intent);

/// Deterministic English interpreter used as the offline provider and as
/// the test oracle. Digits only; number words are not recognized.
/// Throws kEmptyInput, kUninterpretable or kAmbiguous.
CommandIntent rule_based_interpret(std::string_view transcript,
                                   const DefaultsConfig& defaults = {});

/// Shortest decimal text that parses back to exactly `value`. Integral
/// values keep a trailing ".0" when `force_fraction` is set.
std::string format_number(double value, bool force_fraction);

}  // namespace teleop::interp
