// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "teleop/bench.hpp"
#include "teleop/controller.hpp"
#include "teleop/service.hpp"
#include "teleop/simulator.hpp"
#include "teleop/speech.hpp"

using namespace teleop;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void check(bool ok, const std::string& what) {
    if (!ok) pass = false;
    notes.push_back((ok ? "" : "!! ") + what);
  }
};

std::string num(double v, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void run(const std::string& name, const std::function<void(Outcome&)>& body) {
  Outcome o;
  try {
    body(o);
  } catch (const std::exception& e) {
    o.check(false, std::string("threw: ") + e.what());
  }
  std::cout << (o.pass ? "PASS " : "FAIL ") << name;
  std::string sep = ": ";
  for (const auto& n : o.notes) {
    std::cout << sep << n;
    sep = "; ";
  }
  std::cout << std::endl;
  if (!o.pass) ++failures;
}

class ManualClock final : public Clock {
 public:
  double now() const override { return t_; }
  void wait_until(double deadline, const std::function<bool()>& ready) override {
    while (!ready() && t_ < deadline - 1e-12) {
      t_ = std::min(deadline, t_ + 0.01);
      if (on_tick) on_tick(t_);
    }
  }
  std::function<void(double)> on_tick;

 private:
  double t_ = 0.0;
};

void table_fidelity(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto table = bench::bundled_reference_table();
  const auto ros = bench::summarize(table.column("rosgpt"));
  const auto gpt4 = bench::summarize(table.column("gpt4"));
  o.check(num(ros.mean, 4) == "1.2865", "rosgpt mean " + num(ros.mean, 4) + " == 1.2865");
  o.check(std::abs(gpt4.mean - 1.7630) <= 0.005, "gpt4 mean " + num(gpt4.mean, 4) + " within 0.005 of 1.7630");
  o.check(ros.successes == 14 && ros.count == 20,
          "rosgpt successes " + std::to_string(ros.successes) + "/" + std::to_string(ros.count) + " == 14/20");
  const double dt = seconds_since(t0);
  o.check(dt < 1.0, "runtime " + num(dt, 3) + " s < 1 s");
}

void discrepancy(Outcome& o) {
  const auto table = bench::bundled_reference_table();
  const auto gpt35 = bench::summarize(table.column("gpt35"));
  o.check(std::abs(gpt35.raw_mean - 1.0965) <= 0.0005, "gpt35 mean " + num(gpt35.raw_mean, 4) + " within 0.0005 of 1.0965");
  const auto findings = bench::check_reference(table);
  auto flagged = [&](const std::string& check, const std::string& reported) {
    for (const auto& f : findings) {
      if (f.check == check) return !f.consistent && f.reported == reported;
    }
    return false;
  };
  o.check(flagged("mean gpt35", "1.18"), "printed 1.18 flagged");
  o.check(flagged("reduction from column means", "7.01") && flagged("reduction from claimed means", "7.01"),
          "7.01% flagged against both pairings");
  o.check(table.column("gpt35").reported_mean == 1.18 && table.claims.reduction_percent == 7.01,
          "stored 1.18 and 7.01 left as given");
}

void end_to_end(Outcome& o) {
  const auto corpus = bench::bundled_corpus();
  bool cm = false, kmh = false, right = false, left = false;
  for (const auto& c : corpus) {
    cm |= c.transcript.find("centimeter") != std::string::npos || c.transcript.find(" cm") != std::string::npos;
    kmh |= c.transcript.find("km/h") != std::string::npos ||
           c.transcript.find("kilometers per hour") != std::string::npos;
    right |= c.transcript.find("turn right") != std::string::npos;
    left |= c.transcript.find("turn left") != std::string::npos;
  }
  o.check(corpus.size() == 20, "corpus has " + std::to_string(corpus.size()) + " commands");
  o.check(cm && kmh && right && left, "corpus covers cm, km/h, turn right, turn left");

  const auto t0 = std::chrono::steady_clock::now();
  llm::MockChatServer mock(llm::LatencySchedule(llm::LatencySchedule::Fixed{0.0}));
  mock.start();
  llm::ProviderConfig pc;
  pc.base_url = mock.base_url();
  llm::HttpChatProvider provider(pc);
  const auto records = bench::run_bench(corpus, provider);
  const double dt = seconds_since(t0);
  const auto ok = bench::summarize(records).successes;
  o.check(ok == 20, std::to_string(ok) + "/20 exact intent matches");
  o.check(dt < 5.0, "runtime " + num(dt, 3) + " s < 5 s");
}

void latency_replay(Outcome& o) {
  const auto table = bench::bundled_reference_table();
  const auto& column = table.column("rosgpt");
  llm::MockChatServer mock(bench::column_schedule(column));
  mock.start();
  llm::ProviderConfig pc;
  pc.base_url = mock.base_url();
  llm::HttpChatProvider provider(pc);
  const auto records = bench::run_bench(bench::bundled_corpus(), provider);
  double worst_low = 1e9;
  double worst_high = -1e9;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const double over = records[i].latency() - column.latency[i];
    worst_low = std::min(worst_low, over);
    worst_high = std::max(worst_high, over);
  }
  o.check(records.size() == column.latency.size(), std::to_string(records.size()) + " rows replayed");
  o.check(worst_low >= 0.0 && worst_high <= 0.020,
          "per-row overhead in [" + num(worst_low * 1000, 2) + ", " + num(worst_high * 1000, 2) + "] ms within [0, 20] ms");
  const double mean = bench::summarize(records).raw_mean;
  o.check(mean - 1.2865 >= 0.0 && mean - 1.2865 <= 0.020, "mean " + num(mean, 4) + " s within +0.020 of 1.2865");
}

void kinematics(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  const double dt = 0.01;
  const double tol = 0.01 + 0.5 * dt;
  auto rig = [&](double start_yaw, const CommandIntent& intent) {
    bus::Bus bus;
    sim::SimConfig sc;
    sc.dt = dt;
    sc.initial.yaw = start_yaw;
    sim::Simulator sim(bus, sc);
    sim::SimClock clock(sim);
    control::Controller controller(bus, clock);
    sim.start();
    controller.execute(intent);
    const RobotPose p = sim.pose();
    sim.stop();
    return p;
  };
  const RobotPose moved = rig(0.0, CommandIntent::move(2.0, 0.5));
  const double disp = std::hypot(moved.x, moved.y);
  o.check(std::abs(disp - 2.0) <= 0.02, "move 2.0 m -> " + num(disp, 4) + " m (1%)");
  for (double deg : {90.0, -90.0}) {
    const RobotPose p = rig(0.0, CommandIntent::rotate(deg, 0.5));
    const double err = std::abs(wrap_angle(p.yaw - deg_to_rad(deg)));
    o.check(err <= tol, "rotate " + num(deg, 0) + " deg error " + num(err, 5) + " rad <= " + num(tol, 3));
  }
  for (double deg : {60.0, -60.0}) {
    const double start = deg > 0 ? 3.0 : -3.0;
    const RobotPose p = rig(start, CommandIntent::rotate(deg, 0.5));
    const double err = std::abs(wrap_angle(p.yaw - wrap_angle(start + deg_to_rad(deg))));
    o.check(err <= tol, "across the wrap from " + num(start, 1) + " rad by " + num(deg, 0) + " deg error " +
                            num(err, 5) + " rad");
  }
  const double elapsed = seconds_since(t0);
  o.check(elapsed < 2.0, "runtime " + num(elapsed, 3) + " s < 2 s");
}

void parser_properties(Outcome& o) {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> mag(0.0, 360.0);
  std::uniform_real_distribution<double> spd(1e-3, 3.0);
  std::bernoulli_distribution coin(0.5);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    double m = mag(rng);
    if (i % 7 == 0) m = std::floor(m);
    if (coin(rng)) m = -m;
    const double s = spd(rng);
    const CommandIntent in = coin(rng) ? CommandIntent::move(m, s) : CommandIntent::rotate(m, s);
    if (!(interp::parse_response(interp::format_intent(in)) == in)) ++mismatches;
  }
  o.check(mismatches == 0, "1000 round trips, " + std::to_string(mismatches) + " mismatches");

  const std::set<ErrorCode> classified{ErrorCode::kUnparseable,       ErrorCode::kWrongArity,
                                       ErrorCode::kNonNumeric,        ErrorCode::kUnknownDirection,
                                       ErrorCode::kNegativeMagnitude, ErrorCode::kNonPositiveSpeed};
  const std::vector<std::string> vocab{"move", "rotate", "forward", "back", "clockwise", "counterclockwise",
                                       "meters", "degrees", "at", "speed", "nan", "-1", "0", "1e400", "2.5", "\x01"};
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> len(0, 64);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  int unclassified = 0;
  for (int i = 0; i < 100000; ++i) {
    std::string s;
    const int n = len(rng);
    if (i % 2 == 0) {
      for (int k = 0; k < n; ++k) s.push_back(static_cast<char>(byte(rng)));
    } else {
      for (int k = 0; k < n % 12; ++k) s += vocab[pick(rng)] + " ";
    }
    try {
      interp::parse_response(s);
    } catch (const Error& e) {
      if (!classified.count(e.code())) ++unclassified;
    } catch (...) {
      ++unclassified;
    }
  }
  o.check(unclassified == 0, "100000 fuzz inputs, " + std::to_string(unclassified) + " unclassified failures");
}

void quaternion(Outcome& o) {
  double worst = 0.0;
  for (int i = 0; i < 64; ++i) {
    const double yaw = -kPi + (i + 0.5) * (2 * kPi / 64);
    worst = std::max(worst, std::abs(wrap_angle(yaw_from_quaternion(quaternion_from_yaw(yaw)) - yaw)));
  }
  o.check(worst <= 1e-9, "64 yaws, worst round-trip error " + std::to_string(worst));
  const double id = yaw_from_quaternion(Quaternion{});
  o.check(id == 0.0, "identity quaternion -> yaw " + std::to_string(id));
}

void segmentation(Outcome& o) {
  const speech::SegmenterConfig cfg;
  for (int rate : {16000, 44100}) {
    speech::AudioClip clip;
    clip.sample_rate = rate;
    const double lead = 1.2, tone = 1.5, tail = 2.0;
    for (std::size_t i = 0; i < static_cast<std::size_t>((lead + tone + tail) * rate); ++i) {
      const double t = static_cast<double>(i) / rate;
      clip.samples.push_back(t >= lead && t < lead + tone ? 0.4f * static_cast<float>(std::sin(2 * kPi * 300 * t)) : 0.0f);
    }
    const auto seg = speech::find_segment(clip, cfg);
    if (!seg) {
      o.check(false, std::to_string(rate) + " Hz: no segment");
      continue;
    }
    const double start_err = std::abs(seg->start_time() - lead) / cfg.frame;
    // The end is declared once the required silence has elapsed after the tone.
    const double end_err = std::abs(seg->end_time() - (lead + tone + cfg.silence_duration)) / cfg.frame;
    o.check(start_err <= 2.0 && end_err <= 2.0, std::to_string(rate) + " Hz: start off by " + num(start_err, 2) +
                                                    " frames, end off by " + num(end_err, 2) + " frames");
  }
  speech::AudioClip silence;
  silence.sample_rate = 16000;
  silence.samples.assign(32000, 0.0f);
  o.check(!speech::find_segment(silence, cfg).has_value(), "all-silence -> no speech");
}

void stop_guarantee(Outcome& o) {
  {
    bus::Bus bus;
    sim::Simulator sim(bus);
    sim::SimClock clock(sim);
    control::Controller controller(bus, clock);
    bus::Recorder<Twist> rec(bus, bus::kCmdVel);
    sim.start();
    controller.execute(CommandIntent::move(0.5, 0.25));
    o.check(rec.last() && rec.last()->is_zero(), "after successful move: last Twist zero");
    controller.execute(CommandIntent::rotate(-45, 0.5));
    o.check(rec.last() && rec.last()->is_zero(), "after successful rotate: last Twist zero");
  }
  {
    bus::Bus bus;
    ManualClock clock;
    bus.advertise(bus::kImuData);
    bus.advertise(bus::kCmdVel);
    clock.on_tick = [&](double t) { bus.publish(bus::kImuData, bus::ImuSample{quaternion_from_yaw(0.0), t}); };
    bus::Recorder<Twist> rec(bus, bus::kCmdVel);
    control::Controller controller(bus, clock);
    bus.publish(bus::kImuData, bus::ImuSample{quaternion_from_yaw(0.0), 0.0});
    ErrorCode code = ErrorCode::kInvalidArgument;
    try {
      controller.execute(CommandIntent::rotate(90, 0.5));
    } catch (const Error& e) {
      code = e.code();
    }
    o.check(code == ErrorCode::kTimeout && rec.last() && rec.last()->is_zero(),
            "after rotation timeout (" + std::string(to_string(code)) + "): last Twist zero");
  }
  {
    service::SessionConfig cfg;
    cfg.provider_kind = service::ProviderKind::kOffline;
    cfg.sim.pacing = sim::Pacing::kRealTime;
    service::Session session(cfg);
    bus::Recorder<Twist> rec(session.bus(), bus::kCmdVel);
    session.start();
    auto stream = session.subscribe();
    session.submit_command("move forward 2 meters at 0.5 meters per second");
    while (auto e = stream->pop(std::chrono::seconds(5))) {
      if (e->kind == service::EventKind::kMotionStarted) break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    const bool was_moving = rec.last() && !rec.last()->is_zero();
    session.shutdown();
    o.check(was_moving && rec.last() && rec.last()->is_zero(), "after shutdown mid-motion: last Twist zero");
  }
}

}  // namespace

int main() {
  run("Reference table fidelity", table_fidelity);
  run("Documented-discrepancy check", discrepancy);
  run("End-to-end success-rate reproduction", end_to_end);
  run("Latency replay", latency_replay);
  run("Kinematics", kinematics);
  run("Parser properties", parser_properties);
  run("Quaternion", quaternion);
  run("Segmentation", segmentation);
  run("Stop guarantee", stop_guarantee);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
