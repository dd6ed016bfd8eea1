#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <unistd.h>

#include <CLI11.hpp>

#include "teleop/bench.hpp"
#include "teleop/service.hpp"

using namespace teleop;
using namespace teleop::service;

namespace {

struct SessionOptions {
  std::string config_file;
  std::vector<std::string> settings;
  std::string provider;
  std::string base_url;
  std::string model;
  std::string mock_latency;
  std::string pacing;
  std::string manifest;
  std::string event_log;
};

void add_session_options(CLI::App* app, SessionOptions& o, const std::string& default_pacing) {
  o.pacing = default_pacing;
  app->add_option("--config", o.config_file, "key=value config file")->check(CLI::ExistingFile);
  app->add_option("--set", o.settings, "override a config key, e.g. --set sim.dt=0.005");
  app->add_option("--provider", o.provider, "LLM provider")->check(CLI::IsMember({"mock", "http", "offline"}));
  app->add_option("--base-url", o.base_url, "chat completions base URL (http provider)");
  app->add_option("--model", o.model, "model name sent to the provider");
  app->add_option("--mock-latency", o.mock_latency,
                  "mock schedule: gpt35|gpt4|rosgpt, fixed:<ms>, seq:<s,...>, uniform:<lo,hi[,seed]>, file:<path>");
  app->add_option("--pacing", o.pacing, "simulator pacing")->check(CLI::IsMember({"fast", "realtime"}));
  app->add_option("--manifest", o.manifest, "transcript manifest for the mock speech-to-text");
  app->add_option("--event-log", o.event_log, "append session events to this JSONL file");
}

SessionConfig build_config(const SessionOptions& o) {
  SessionConfig c = o.config_file.empty() ? SessionConfig{} : load_config(o.config_file);
  for (const auto& kv : o.settings) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfig, "--set expects key=value, got '" + kv + "'");
    apply_setting(c, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.provider.empty()) apply_setting(c, "provider.kind", o.provider);
  if (!o.base_url.empty()) apply_setting(c, "provider.base_url", o.base_url);
  if (!o.model.empty()) apply_setting(c, "provider.model", o.model);
  if (!o.mock_latency.empty()) apply_setting(c, "mock.latency", o.mock_latency);
  if (!o.pacing.empty()) apply_setting(c, "sim.pacing", o.pacing);
  if (!o.manifest.empty()) apply_setting(c, "stt.manifest", o.manifest);
  if (!o.event_log.empty()) apply_setting(c, "session.event_log", o.event_log);
  validate(c);
  return c;
}

std::string fixed(double v, int digits) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits) << v;
  return os.str();
}

std::string describe_event(const SessionEvent& e) {
  const Json& p = e.payload;
  std::string line = "[" + std::to_string(e.command_id) + "] " + std::string(to_string(e.kind));
  switch (e.kind) {
    case EventKind::kTranscriptReceived: return line + ": " + p.value("text", "");
    case EventKind::kIntentParsed: return line + ": " + p["intent"].value("text", "");
    case EventKind::kMotionStarted: return line;
    case EventKind::kMotionCompleted:
      return line + ": pose x=" + fixed(p["pose"]["x"], 3) + " y=" + fixed(p["pose"]["y"], 3) +
             " yaw=" + fixed(rad_to_deg(p["pose"]["yaw"].get<double>()), 1) + " deg";
    case EventKind::kError: return line + ": " + p.value("code", "") + ": " + p.value("message", "");
    case EventKind::kFeedbackMessage: return line + ": " + p.value("message", "");
    case EventKind::kLatencySample: return line + ": " + fixed(p["latency_s"], 4) + " s";
  }
  return line;
}

// Prints one command's events. Returns false when it ended in an Error.
bool follow(EventStream& stream, std::uint64_t id, std::ostream& out) {
  bool ok = true;
  bool ended = false;
  while (true) {
    auto e = stream.pop(ended ? std::chrono::milliseconds(300) : std::chrono::milliseconds(60000));
    if (!e) break;
    if (e->command_id != id) continue;
    out << describe_event(*e) << '\n';
    if (e->kind == EventKind::kError) ok = false;
    if (e->kind == EventKind::kLatencySample) break;
    ended |= e->kind == EventKind::kMotionCompleted || e->kind == EventKind::kError;
  }
  return ok;
}

void print_state(const Session& s, std::ostream& out) {
  out << to_json(s.state_snapshot()).dump(2) << '\n';
}

int run_serve(const SessionOptions& o, const std::string& host, int port) {
  // Block the shutdown signals before any thread starts so sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  SessionConfig cfg = build_config(o);
  Session session(cfg);
  session.start();
  GatewayConfig gc;
  gc.host = host.empty() ? cfg.gateway_host : host;
  gc.port = port >= 0 ? port : cfg.gateway_port;
  Gateway gateway(session, gc);
  gateway.start();
  std::cout << "gateway listening on http://" << gc.host << ":" << gateway.port() << "/api" << std::endl;
  if (!session.provider_url().empty()) std::cout << "provider at " << session.provider_url() << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  std::cout << "shutting down" << std::endl;
  gateway.stop();
  session.shutdown();
  return 0;
}

int run_repl(const SessionOptions& o) {
  Session session(build_config(o));
  session.start();
  auto stream = session.subscribe();
  const bool tty = isatty(STDIN_FILENO);
  std::string line;
  while (true) {
    if (tty) std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (line == ":quit" || line == ":q") break;
    if (line == ":state") {
      print_state(session, std::cout);
      continue;
    }
    if (line == ":metrics") {
      std::cout << to_json(session.metrics()).dump(2) << '\n';
      continue;
    }
    if (line == ":help") {
      std::cout << "type a command, or :state, :metrics, :quit\n";
      continue;
    }
    if (line.empty()) continue;
    try {
      follow(*stream, session.submit_command(line), std::cout);
    } catch (const Error& e) {
      std::cout << "error: " << e.what() << '\n';
    }
  }
  session.shutdown();
  return 0;
}

int run_simulate(const SessionOptions& o, const std::string& script) {
  std::ifstream in(script);
  if (!in) throw Error(ErrorCode::kConfig, "cannot open script '" + script + "'");
  Session session(build_config(o));
  session.start();
  auto stream = session.subscribe();
  int failures = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    if (!follow(*stream, session.submit_command(line), std::cout)) ++failures;
  }
  const auto st = session.state_snapshot();
  std::cout << "final pose x=" << fixed(st.pose.x, 4) << " y=" << fixed(st.pose.y, 4)
            << " yaw=" << fixed(st.yaw_deg, 2) << " deg, sim time " << fixed(st.sim_time, 2) << " s\n";
  session.shutdown();
  return failures == 0 ? 0 : 1;
}

struct BenchOptions {
  std::string corpus;
  std::string provider = "mock";
  std::string base_url = "http://127.0.0.1:8080";
  std::string model = "gpt-3.5-turbo";
  std::string schedule = "fixed:0";
  std::string report;
  std::string records;
  int retries = 0;
  double timeout = 30.0;
  bool reference = false;
};

int run_bench(const BenchOptions& o) {
  const auto corpus = o.corpus.empty() ? bench::bundled_corpus() : bench::load_corpus(o.corpus);
  llm::ProviderConfig pc;
  pc.base_url = o.base_url;
  pc.model = o.model;
  pc.timeout = o.timeout;
  pc.api_key = llm::api_key_from_env();

  std::unique_ptr<llm::MockChatServer> mock;
  std::unique_ptr<llm::ChatProvider> provider;
  if (o.provider == "mock") {
    mock = std::make_unique<llm::MockChatServer>(schedule_from_spec(o.schedule));
    mock->start();
    pc.base_url = mock->base_url();
    pc.api_key.reset();
    provider = std::make_unique<llm::HttpChatProvider>(pc);
  } else {
    provider = llm::make_provider(o.provider, pc);
  }

  bench::BenchPolicy policy;
  policy.retries = o.retries;
  const auto records = bench::run_bench(corpus, *provider, policy);
  std::cout << "provider " << provider->name() << " (" << provider->model() << ")";
  if (mock) std::cout << ", mock schedule " << o.schedule;
  std::cout << "\n" << bench::format_records(records);

  if (!o.report.empty()) {
    std::ofstream out(o.report);
    if (!out) throw Error(ErrorCode::kConfig, "cannot write report '" + o.report + "'");
    out << bench::summary_tsv(records);
    std::cout << "summary written to " << o.report << '\n';
  }
  if (!o.records.empty()) {
    std::ofstream out(o.records);
    if (!out) throw Error(ErrorCode::kConfig, "cannot write records '" + o.records + "'");
    out << bench::records_tsv(records);
  }
  if (o.reference) {
    const auto table = bench::bundled_reference_table();
    std::cout << '\n' << bench::format_reference_summary(table) << '\n'
              << bench::format_findings(bench::check_reference(table));
  }
  return 0;
}

int run_reference() {
  const auto table = bench::bundled_reference_table();
  std::cout << bench::format_reference_summary(table) << '\n'
            << bench::format_findings(bench::check_reference(table));
  return 0;
}

int run_transcribe(const std::string& wav, const std::string& manifest, const std::string& stt,
                   const std::string& base_url, const std::string& language) {
  const auto clip = speech::read_wav(wav);
  const auto seg = speech::find_segment(clip);
  if (!seg) {
    std::cout << "no speech detected\n";
    return 1;
  }
  std::cout << "speech " << fixed(seg->start_time(), 3) << " s to " << fixed(seg->end_time(), 3) << " s\n";
  std::unique_ptr<speech::Transcriber> t;
  if (stt == "http") {
    speech::HttpTranscriberConfig c;
    if (!base_url.empty()) c.base_url = base_url;
    c.api_key = llm::api_key_from_env();
    t = std::make_unique<speech::HttpTranscriber>(c);
  } else {
    t = std::make_unique<speech::MockTranscriber>(manifest.empty() ? speech::MockTranscriber{}
                                                                   : speech::MockTranscriber::load(manifest));
  }
  const auto voiced = speech::segment(clip);
  const auto result = t->transcribe(*voiced, language);
  if (!result.ok()) {
    std::cout << to_string(result.status) << (result.detail.empty() ? "" : ": " + result.detail) << '\n';
    return 1;
  }
  std::cout << result.text << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Natural-language teleoperation of a simulated mobile robot"};
  app.require_subcommand(1);

  SessionOptions serve_opts;
  std::string host;
  int port = -1;
  auto* serve = app.add_subcommand("serve", "run the session behind the HTTP/WebSocket gateway");
  add_session_options(serve, serve_opts, "realtime");
  serve->add_option("--host", host, "listen address");
  serve->add_option("--port", port, "listen port (0 picks a free one)")->check(CLI::Range(0, 65535));

  SessionOptions repl_opts;
  auto* repl = app.add_subcommand("repl", "type commands, watch the robot respond");
  add_session_options(repl, repl_opts, "realtime");

  SessionOptions sim_opts;
  std::string script;
  auto* simulate = app.add_subcommand("simulate", "run a script of commands against the simulator");
  add_session_options(simulate, sim_opts, "fast");
  simulate->add_option("--script", script, "one command per line, '#' comments")->required()->check(CLI::ExistingFile);

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "measure interpretation latency and success over a corpus");
  bench->add_option("--corpus", bench_opts.corpus, "corpus TSV (default: bundled)")->check(CLI::ExistingFile);
  bench->add_option("--provider", bench_opts.provider, "provider")->check(CLI::IsMember({"mock", "http", "offline"}));
  bench->add_option("--base-url", bench_opts.base_url, "chat completions base URL (http provider)");
  bench->add_option("--model", bench_opts.model, "model name");
  bench->add_option("--schedule", bench_opts.schedule,
                    "mock latency: gpt35|gpt4|rosgpt, fixed:<ms>, seq:<s,...>, uniform:<lo,hi[,seed]>, file:<path>");
  bench->add_option("--report", bench_opts.report, "write the summary TSV here");
  bench->add_option("--records", bench_opts.records, "write per-command rows TSV here");
  bench->add_option("--retries", bench_opts.retries, "extra attempts after a provider failure")->check(CLI::Range(0, 10));
  bench->add_option("--timeout", bench_opts.timeout, "provider timeout, s");
  bench->add_flag("--reference", bench_opts.reference, "also print the reference table and its consistency checks");

  auto* reference = app.add_subcommand("reference", "print the bundled reference table and its consistency checks");

  std::string wav;
  std::string manifest;
  std::string stt = "mock";
  std::string stt_url;
  std::string language = "en-US";
  auto* transcribe = app.add_subcommand("transcribe", "segment a WAV clip and transcribe it");
  transcribe->add_option("--wav", wav, "input WAV")->required()->check(CLI::ExistingFile);
  transcribe->add_option("--manifest", manifest, "mock transcript manifest (id<TAB>text)");
  transcribe->add_option("--stt", stt, "speech-to-text backend")->check(CLI::IsMember({"mock", "http"}));
  transcribe->add_option("--base-url", stt_url, "speech-to-text base URL");
  transcribe->add_option("--language", language, "language tag");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return run_serve(serve_opts, host, port);
    if (*repl) return run_repl(repl_opts);
    if (*simulate) return run_simulate(sim_opts, script);
    if (*bench) return run_bench(bench_opts);
    if (*reference) return run_reference();
    if (*transcribe) return run_transcribe(wav, manifest, stt, stt_url, language);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
