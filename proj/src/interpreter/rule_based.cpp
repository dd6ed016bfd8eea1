#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "teleop/interpreter.hpp"

namespace teleop::interp {

namespace {

enum class Quantity { kLength, kSpeed, kAngle, kAngularSpeed, kBare, kBareSpeed };

struct UnitPhrase {
  std::vector<std::string_view> words;
  Quantity quantity;
  double (*to_canonical)(double);  // m, m/s, deg, rad/s
};

double identity(double v) { return v; }
double cm_to_m(double v) { return convert_length(v, LengthUnit::kCentimeter); }
double mm_to_m(double v) { return convert_length(v, LengthUnit::kMillimeter); }
double km_to_m(double v) { return convert_length(v, LengthUnit::kKilometer); }
double kmh_to_mps(double v) { return convert_speed(v, SpeedUnit::kKilometersPerHour); }
double cmps_to_mps(double v) { return convert_speed(v, SpeedUnit::kCentimetersPerSecond); }
double rad_to_deg_fn(double v) { return rad_to_deg(v); }
double degps_to_radps(double v) { return deg_to_rad(v); }

const std::vector<UnitPhrase>& unit_phrases() {
  static const std::vector<UnitPhrase> phrases = [] {
    std::vector<UnitPhrase> p;
    auto add = [&p](std::vector<std::string_view> w, Quantity q, double (*f)(double)) {
      p.push_back({std::move(w), q, f});
    };
    for (std::string_view m : {"meter", "meters", "metre", "metres", "m"}) {
      add({m, "per", "second"}, Quantity::kSpeed, identity);
      add({m, "a", "second"}, Quantity::kSpeed, identity);
    }
    for (std::string_view km : {"kilometer", "kilometers", "kilometre", "kilometres", "km"}) {
      add({km, "per", "hour"}, Quantity::kSpeed, kmh_to_mps);
      add({km, "an", "hour"}, Quantity::kSpeed, kmh_to_mps);
    }
    for (std::string_view cm : {"centimeter", "centimeters", "centimetre", "centimetres", "cm"}) {
      add({cm, "per", "second"}, Quantity::kSpeed, cmps_to_mps);
      add({cm, "a", "second"}, Quantity::kSpeed, cmps_to_mps);
    }
    for (std::string_view r : {"radian", "radians", "rad"}) {
      add({r, "per", "second"}, Quantity::kAngularSpeed, identity);
    }
    for (std::string_view d : {"degree", "degrees", "deg"}) {
      add({d, "per", "second"}, Quantity::kAngularSpeed, degps_to_radps);
    }
    add({"m/s"}, Quantity::kSpeed, identity);
    add({"mps"}, Quantity::kSpeed, identity);
    add({"km/h"}, Quantity::kSpeed, kmh_to_mps);
    add({"kmh"}, Quantity::kSpeed, kmh_to_mps);
    add({"kph"}, Quantity::kSpeed, kmh_to_mps);
    add({"cm/s"}, Quantity::kSpeed, cmps_to_mps);
    add({"rad/s"}, Quantity::kAngularSpeed, identity);
    add({"deg/s"}, Quantity::kAngularSpeed, degps_to_radps);
    for (std::string_view m : {"meter", "meters", "metre", "metres", "m"}) {
      add({m}, Quantity::kLength, identity);
    }
    for (std::string_view cm : {"centimeter", "centimeters", "centimetre", "centimetres", "cm"}) {
      add({cm}, Quantity::kLength, cm_to_m);
    }
    for (std::string_view mm : {"millimeter", "millimeters", "millimetre", "millimetres", "mm"}) {
      add({mm}, Quantity::kLength, mm_to_m);
    }
    for (std::string_view km : {"kilometer", "kilometers", "kilometre", "kilometres", "km"}) {
      add({km}, Quantity::kLength, km_to_m);
    }
    for (std::string_view d : {"degree", "degrees", "deg"}) add({d}, Quantity::kAngle, identity);
    for (std::string_view r : {"radian", "radians", "rad"}) {
      add({r}, Quantity::kAngle, rad_to_deg_fn);
    }
    std::stable_sort(p.begin(), p.end(), [](const UnitPhrase& a, const UnitPhrase& b) {
      return a.words.size() > b.words.size();
    });
    return p;
  }();
  return phrases;
}

const std::set<std::string_view> kMoveVerbs = {"move",  "moves",   "moving", "go",
                                               "goes",  "going",   "advance", "advances",
                                               "drive", "drives",  "driving"};
const std::set<std::string_view> kRotateVerbs = {"rotate", "rotates", "rotating", "turn",
                                                 "turns",  "turning", "spin",     "spins",
                                                 "spinning"};
const std::set<std::string_view> kForward = {"forward", "forwards", "ahead"};
const std::set<std::string_view> kBack = {"back", "backward", "backwards", "reverse"};
const std::set<std::string_view> kClockwise = {"right", "clockwise"};
const std::set<std::string_view> kCounterClockwise = {"left", "counterclockwise",
                                                      "anticlockwise"};
const std::set<std::string_view> kSpeedCues = {"at", "speed", "velocity", "rate"};

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Lowercases, maps the degree sign to a word, keeps only characters that can
// be part of words, numbers or unit symbols, and splits glued "150cm" forms.
std::vector<std::string> tokenize(std::string_view text) {
  std::string s;
  s.reserve(text.size());
  for (char c : text) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  replace_all(s, "\xC2\xB0", " deg ");
  replace_all(s, "counter-clockwise", "counterclockwise");
  replace_all(s, "counter clockwise", "counterclockwise");
  replace_all(s, "anti-clockwise", "anticlockwise");

  std::string cleaned;
  cleaned.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    const bool next_digit = i + 1 < s.size() && is_digit(s[i + 1]);
    if ((c >= 'a' && c <= 'z') || is_digit(c) || c == '/') {
      cleaned.push_back(c);
    } else if (c == '.' && next_digit) {
      cleaned.push_back(c);
    } else {
      cleaned.push_back(' ');
    }
  }

  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && cleaned[i] == ' ') ++i;
    std::size_t start = i;
    while (i < cleaned.size() && cleaned[i] != ' ') ++i;
    if (i == start) continue;
    std::string word = cleaned.substr(start, i - start);
    if (is_digit(word[0]) || (word[0] == '.' && word.size() > 1)) {
      std::size_t cut = 0;
      while (cut < word.size() && (is_digit(word[cut]) || word[cut] == '.')) ++cut;
      tokens.push_back(word.substr(0, cut));
      if (cut < word.size()) tokens.push_back(word.substr(cut));
    } else {
      tokens.push_back(std::move(word));
    }
  }
  return tokens;
}

std::optional<double> parse_number(const std::string& token) {
  if (token.empty() || !(is_digit(token[0]) || token[0] == '.')) return std::nullopt;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

struct Reading {
  Quantity quantity;
  double value;  // canonical unit
};

void assign(std::optional<double>& slot, double value, std::string_view what) {
  if (slot && *slot != value) {
    throw Error(ErrorCode::kAmbiguous, "more than one " + std::string(what) + " given");
  }
  slot = value;
}

}  // namespace

CommandIntent rule_based_interpret(std::string_view transcript, const DefaultsConfig& defaults) {
  const auto tokens = tokenize(transcript);
  if (tokens.empty()) throw Error(ErrorCode::kEmptyInput, "transcript is empty");

  bool move_verb = false;
  bool rotate_verb = false;
  bool forward = false;
  bool back = false;
  bool cw = false;
  bool ccw = false;
  std::vector<Reading> readings;

  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string& t = tokens[i];
    if (auto number = parse_number(t)) {
      std::size_t consumed = 0;
      for (const auto& phrase : unit_phrases()) {
        if (i + 1 + phrase.words.size() > tokens.size()) continue;
        bool match = true;
        for (std::size_t k = 0; k < phrase.words.size(); ++k) {
          if (tokens[i + 1 + k] != phrase.words[k]) {
            match = false;
            break;
          }
        }
        if (match) {
          readings.push_back({phrase.quantity, phrase.to_canonical(*number)});
          consumed = phrase.words.size();
          break;
        }
      }
      if (consumed == 0) {
        // Unitless: a preceding speed cue ("at 0.5", "speed 0.5") marks a speed.
        std::size_t j = i;
        while (j > 0 && (tokens[j - 1] == "of" || tokens[j - 1] == "a" ||
                         tokens[j - 1] == "angular" || tokens[j - 1] == "linear")) {
          --j;
        }
        const bool speed_cue = j > 0 && kSpeedCues.contains(tokens[j - 1]);
        readings.push_back({speed_cue ? Quantity::kBareSpeed : Quantity::kBare, *number});
      }
      i += consumed;
      continue;
    }
    move_verb |= kMoveVerbs.contains(t);
    rotate_verb |= kRotateVerbs.contains(t);
    forward |= kForward.contains(t);
    back |= kBack.contains(t);
    cw |= kClockwise.contains(t);
    ccw |= kCounterClockwise.contains(t);
  }

  if (!move_verb && !rotate_verb) {
    throw Error(ErrorCode::kUninterpretable, "no move or rotate verb in '" +
                                                 std::string(transcript) + "'");
  }
  if (move_verb && rotate_verb) {
    throw Error(ErrorCode::kAmbiguous, "both a move and a rotate verb were given");
  }

  if (move_verb) {
    if (forward && back) throw Error(ErrorCode::kAmbiguous, "both forward and back were given");
    if (cw || ccw) {
      throw Error(ErrorCode::kAmbiguous, "a straight move cannot go left or right");
    }
    std::optional<double> distance;
    std::optional<double> speed;
    for (const auto& r : readings) {
      switch (r.quantity) {
        case Quantity::kLength:
        case Quantity::kBare: assign(distance, r.value, "distance"); break;
        case Quantity::kSpeed:
        case Quantity::kBareSpeed: assign(speed, r.value, "speed"); break;
        case Quantity::kAngle:
        case Quantity::kAngularSpeed:
          throw Error(ErrorCode::kAmbiguous, "angular quantity given for a straight move");
      }
    }
    const double d = distance.value_or(defaults.distance);
    const double v = speed.value_or(defaults.linear_speed);
    if (!(v > 0.0)) throw Error(ErrorCode::kUninterpretable, "speed must be positive");
    return CommandIntent::move(back ? -d : d, v);
  }

  if (cw && ccw) throw Error(ErrorCode::kAmbiguous, "both clockwise and counterclockwise given");
  if (forward || back) {
    throw Error(ErrorCode::kAmbiguous, "a rotation cannot go forward or back");
  }
  std::optional<double> angle;
  std::optional<double> speed;
  for (const auto& r : readings) {
    switch (r.quantity) {
      case Quantity::kAngle:
      case Quantity::kBare: assign(angle, r.value, "angle"); break;
      case Quantity::kAngularSpeed:
      case Quantity::kBareSpeed: assign(speed, r.value, "angular speed"); break;
      case Quantity::kLength:
      case Quantity::kSpeed:
        throw Error(ErrorCode::kAmbiguous, "linear quantity given for a rotation");
    }
  }
  const double a = angle.value_or(defaults.angle);
  const double w = speed.value_or(defaults.angular_speed);
  if (!(w > 0.0)) throw Error(ErrorCode::kUninterpretable, "angular speed must be positive");
  return CommandIntent::rotate(cw ? -a : a, w);
}

}  // namespace teleop::interp
