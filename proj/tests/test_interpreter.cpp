#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "teleop/interpreter.hpp"

using namespace teleop;
using namespace teleop::interp;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

void expect_intent(const CommandIntent& got, Action action, double magnitude, double speed,
                   double tol = 1e-12) {
  EXPECT_EQ(got.action, action);
  EXPECT_NEAR(got.magnitude, magnitude, tol);
  EXPECT_NEAR(got.speed, speed, tol);
}

}  // namespace

TEST(ParseResponse, CanonicalExamples) {
  expect_intent(parse_response("move forward 2.0 meters at speed 0.5"), Action::kMove, 2.0, 0.5);
  expect_intent(parse_response("move back 1.0 meters at speed 0.3"), Action::kMove, -1.0, 0.3);
  expect_intent(parse_response("rotate in direction clockwise 90 degrees with angular speed 0.5"),
                Action::kRotate, -90.0, 0.5);
  expect_intent(
      parse_response("rotate in direction counterclockwise 45 degrees with angular speed 0.2"),
      Action::kRotate, 45.0, 0.2);
}

TEST(ParseResponse, StripsAndSplitsOnAnyWhitespace) {
  expect_intent(parse_response("  \tmove   forward 2 meters\tat speed 0.5 \n"), Action::kMove,
                2.0, 0.5);
}

TEST(ParseResponse, OnlyIndexedTokensMatter) {
  expect_intent(parse_response("move forward 3 x y z 0.25"), Action::kMove, 3.0, 0.25);
  expect_intent(parse_response("rotate a b clockwise 10 c d e f 1.5"), Action::kRotate, -10.0,
                1.5);
}

TEST(ParseResponse, ClassifiedErrors) {
  EXPECT_EQ(code_of([] { parse_response("dance"); }), ErrorCode::kUnparseable);
  EXPECT_EQ(code_of([] { parse_response(""); }), ErrorCode::kUnparseable);
  EXPECT_EQ(code_of([] { parse_response("Move forward 2.0 meters at speed 0.5"); }),
            ErrorCode::kUnparseable);
  EXPECT_EQ(code_of([] { parse_response("move forward 2.0 meters"); }), ErrorCode::kWrongArity);
  EXPECT_EQ(code_of([] { parse_response("move forward 2.0 meters at speed 0.5 please"); }),
            ErrorCode::kWrongArity);
  EXPECT_EQ(code_of([] { parse_response("move forward two meters at speed 0.5"); }),
            ErrorCode::kNonNumeric);
  EXPECT_EQ(code_of([] { parse_response("move forward 2.0 meters at speed fast"); }),
            ErrorCode::kNonNumeric);
  EXPECT_EQ(code_of([] { parse_response("move forward inf meters at speed 0.5"); }),
            ErrorCode::kNonNumeric);
  EXPECT_EQ(code_of([] { parse_response("move forward nan meters at speed 0.5"); }),
            ErrorCode::kNonNumeric);
  EXPECT_EQ(code_of([] { parse_response("move sideways 2.0 meters at speed 0.5"); }),
            ErrorCode::kUnknownDirection);
  EXPECT_EQ(code_of([] { parse_response("rotate in direction right 90 degrees with angular speed 0.5"); }),
            ErrorCode::kUnknownDirection);
  EXPECT_EQ(code_of([] { parse_response("move forward -2.0 meters at speed 0.5"); }),
            ErrorCode::kNegativeMagnitude);
  EXPECT_EQ(code_of([] { parse_response("move forward 2.0 meters at speed 0"); }),
            ErrorCode::kNonPositiveSpeed);
  EXPECT_EQ(code_of([] { parse_response("rotate in direction clockwise 90 degrees with angular speed -1"); }),
            ErrorCode::kNonPositiveSpeed);
}

TEST(FormatIntent, CanonicalSurface) {
  EXPECT_EQ(format_intent(CommandIntent::move(2.0, 0.5)), "move forward 2.0 meters at speed 0.5");
  EXPECT_EQ(format_intent(CommandIntent::move(-1.0, 0.3)), "move back 1.0 meters at speed 0.3");
  EXPECT_EQ(format_intent(CommandIntent::rotate(45, 0.2)),
            "rotate in direction counterclockwise 45 degrees with angular speed 0.2");
  EXPECT_EQ(format_intent(CommandIntent::rotate(-90, 0.5)),
            "rotate in direction clockwise 90 degrees with angular speed 0.5");
  EXPECT_EQ(format_intent(CommandIntent::rotate(-90, 1.0)),
            "rotate in direction clockwise 90 degrees with angular speed 1.0");
}

TEST(FormatIntent, NoQuotesNoFullStop) {
  for (const auto& s : {format_intent(CommandIntent::move(0.1, 0.1)),
                        format_intent(CommandIntent::rotate(-12.5, 2.0))}) {
    EXPECT_EQ(s.find('"'), std::string::npos);
    EXPECT_EQ(s.find('\''), std::string::npos);
    EXPECT_NE(s.back(), '.');
  }
}

TEST(FormatIntent, RejectsInvalidIntent) {
  EXPECT_EQ(code_of([] { format_intent(CommandIntent::move(1.0, 0.0)); }),
            ErrorCode::kInvalidIntent);
  EXPECT_EQ(code_of([] { format_intent(CommandIntent::move(std::nan(""), 0.5)); }),
            ErrorCode::kInvalidIntent);
}

TEST(FormatNumber, ShortestExactText) {
  EXPECT_EQ(format_number(2.0, true), "2.0");
  EXPECT_EQ(format_number(2.0, false), "2");
  EXPECT_EQ(format_number(0.1, true), "0.1");
  EXPECT_EQ(format_number(1.0 / 3.0, false), "0.3333333333333333");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0, false)), 1.0 / 3.0);
}

TEST(RoundTrip, ThousandRandomIntents) {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> mag(0.0, 100.0);
  std::uniform_real_distribution<double> spd(0.0, 2.0);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 1000; ++i) {
    double speed = spd(rng);
    if (speed == 0.0) speed = 2.0;
    double m = mag(rng);
    if (i % 10 == 0) m = std::round(m);  // integral values exercise the ".0" path
    if (coin(rng)) m = -m;
    const CommandIntent in =
        coin(rng) ? CommandIntent::move(m, speed) : CommandIntent::rotate(m, speed);
    const CommandIntent out = parse_response(format_intent(in));
    ASSERT_EQ(out, in) << format_intent(in);
  }
}

TEST(RoundTrip, SignConventionsOnEveryParse) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mag(0.001, 100.0);
  for (int i = 0; i < 200; ++i) {
    const double m = mag(rng);
    EXPECT_LT(parse_response("move back " + format_number(m, true) + " meters at speed 0.5").magnitude, 0);
    EXPECT_GT(parse_response("move forward " + format_number(m, true) + " meters at speed 0.5").magnitude, 0);
    EXPECT_LT(parse_response("rotate in direction clockwise " + format_number(m, false) +
                             " degrees with angular speed 0.5").magnitude, 0);
    EXPECT_GT(parse_response("rotate in direction counterclockwise " + format_number(m, false) +
                             " degrees with angular speed 0.5").magnitude, 0);
  }
}

TEST(Fuzz, HundredThousandArbitraryStringsOnlyClassifiedErrors) {
  const std::set<ErrorCode> allowed{ErrorCode::kUnparseable, ErrorCode::kWrongArity,
                                    ErrorCode::kNonNumeric, ErrorCode::kUnknownDirection,
                                    ErrorCode::kNegativeMagnitude, ErrorCode::kNonPositiveSpeed};
  const std::vector<std::string> vocab{"move", "rotate", "forward", "back", "clockwise",
                                       "counterclockwise", "meters", "at", "speed", "1e308",
                                       "-0", "0.5", "2", "nan", "inf", "1e-400", "0x1p3", "",
                                       "\t", "\xff\xfe", "\0", "1,5", "+3", ".5", "5."};
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 80);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  std::uniform_int_distribution<int> words(1, 12);
  std::size_t unexpected = 0;
  std::size_t accepted = 0;
  for (int i = 0; i < 100000; ++i) {
    std::string s;
    if (i % 2 == 0) {
      const int n = len(rng);
      for (int k = 0; k < n; ++k) s.push_back(static_cast<char>(byte(rng)));
    } else {
      const int n = words(rng);
      for (int k = 0; k < n; ++k) s += vocab[pick(rng)] + " ";
    }
    try {
      const CommandIntent intent = parse_response(s);
      validate_intent(intent);
      ++accepted;
    } catch (const Error& e) {
      if (!allowed.count(e.code())) ++unexpected;
    } catch (...) {
      ++unexpected;
    }
  }
  EXPECT_EQ(unexpected, 0u);
  EXPECT_GT(accepted, 0u);  // the vocabulary half should hit the grammar sometimes
}

TEST(Prompts, EmbedTranscriptVerbatim) {
  const Prompts p = build_prompts("move forward two meters");
  EXPECT_NE(p.user.find("move forward two meters"), std::string::npos);
  EXPECT_EQ(extract_transcript(p.user), "move forward two meters");
  EXPECT_FALSE(p.system.empty());
}

TEST(Prompts, SystemPromptStatesDefaultsAndRules) {
  const Prompts p = build_prompts("go");
  for (const char* needle : {"0.2", "0.5", "90", "1.0", "meters", "m/s", "quotation",
                             "full stop", "move <forward|back>", "rotate in direction"}) {
    EXPECT_NE(p.system.find(needle), std::string::npos) << needle;
  }
  DefaultsConfig d;
  d.linear_speed = 0.35;
  EXPECT_NE(build_prompts("go", d).system.find("0.35"), std::string::npos);
}

TEST(Prompts, ByteStable) {
  EXPECT_EQ(build_prompts("turn left"), build_prompts("turn left"));
}

TEST(Prompts, EmptyTranscriptRejected) {
  EXPECT_EQ(code_of([] { build_prompts(""); }), ErrorCode::kEmptyInput);
  EXPECT_EQ(code_of([] { build_prompts("  \t "); }), ErrorCode::kEmptyInput);
}

TEST(ExtractTranscript, WithoutMarkerReturnsTrimmedText) {
  EXPECT_EQ(extract_transcript("  turn left  "), "turn left");
}

TEST(RuleBased, Examples) {
  const CommandIntent a = rule_based_interpret("move forward 150 centimeters at 2 kilometers per hour");
  expect_intent(a, Action::kMove, 1.5, 0.5556, 1e-3);
  expect_intent(rule_based_interpret("turn right 90 degrees"), Action::kRotate, -90.0, 0.5);
  expect_intent(rule_based_interpret("go back one... 1 meter"), Action::kMove, -1.0, 0.2);
}

TEST(RuleBased, UnitsAndPhrasing) {
  expect_intent(rule_based_interpret("Move forward 2 meters at 0.5 meters per second"),
                Action::kMove, 2.0, 0.5);
  expect_intent(rule_based_interpret("drive ahead 150cm at 0.3 m/s"), Action::kMove, 1.5, 0.3);
  expect_intent(rule_based_interpret("go in reverse 20 cm"), Action::kMove, -0.2, 0.2);
  expect_intent(rule_based_interpret("advance 1 km at 36 km/h"), Action::kMove, 1000.0, 10.0);
  expect_intent(rule_based_interpret("go forward 500 mm at 25 centimeters per second"),
                Action::kMove, 0.5, 0.25);
  expect_intent(rule_based_interpret("turn left 45 degrees at 0.2 radians per second"),
                Action::kRotate, 45.0, 0.2);
  expect_intent(rule_based_interpret("spin clockwise 180°"), Action::kRotate, -180.0, 0.5);
  expect_intent(rule_based_interpret("rotate counter-clockwise 1.5 radians with angular speed 1"),
                Action::kRotate, 1.5 * 180.0 / kPi, 1.0, 1e-9);
  expect_intent(rule_based_interpret("turn anticlockwise"), Action::kRotate, 90.0, 0.5);
  expect_intent(rule_based_interpret("move forward"), Action::kMove, 1.0, 0.2);
  expect_intent(rule_based_interpret("move forward 3 meters at speed 0.4."), Action::kMove, 3.0,
                0.4);
}

TEST(RuleBased, CustomDefaults) {
  DefaultsConfig d;
  d.distance = 0.5;
  d.angle = 30;
  d.linear_speed = 0.1;
  d.angular_speed = 0.25;
  expect_intent(rule_based_interpret("move ahead", d), Action::kMove, 0.5, 0.1);
  expect_intent(rule_based_interpret("turn right", d), Action::kRotate, -30.0, 0.25);
}

TEST(RuleBased, Errors) {
  EXPECT_EQ(code_of([] { rule_based_interpret(""); }), ErrorCode::kEmptyInput);
  EXPECT_EQ(code_of([] { rule_based_interpret("hello there"); }), ErrorCode::kUninterpretable);
  EXPECT_EQ(code_of([] { rule_based_interpret("move forward and back 2 meters"); }),
            ErrorCode::kAmbiguous);
  EXPECT_EQ(code_of([] { rule_based_interpret("turn left then right"); }), ErrorCode::kAmbiguous);
  EXPECT_EQ(code_of([] { rule_based_interpret("move forward then turn left"); }),
            ErrorCode::kAmbiguous);
  EXPECT_EQ(code_of([] { rule_based_interpret("move forward 2 meters 3 meters"); }),
            ErrorCode::kAmbiguous);
  EXPECT_EQ(code_of([] { rule_based_interpret("move forward 1 meter at 0 m/s"); }),
            ErrorCode::kUninterpretable);
}

TEST(RuleBased, OracleSelfConsistency) {
  const std::vector<std::string> corpus{
      "move forward 2 meters at 0.5 meters per second",
      "go back 30 centimeters",
      "drive forward 1.25 m at 3 km/h",
      "turn right 90 degrees",
      "turn left 30 degrees at 0.25 rad/s",
      "rotate clockwise 2 radians",
      "spin left",
      "move backward 7 meters at speed 1.1",
      "advance 0.333 meters",
      "turn counterclockwise 359.5 degrees with angular speed 1.9",
  };
  for (const auto& s : corpus) {
    const CommandIntent i = rule_based_interpret(s);
    EXPECT_EQ(parse_response(format_intent(i)), i) << s;
  }
}
