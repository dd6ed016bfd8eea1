#include <algorithm>
#include <cctype>

#include "teleop/service.hpp"

namespace teleop::service {

namespace {

constexpr std::size_t kRecentLatencies = 50;

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kTranscriptReceived: return "TranscriptReceived";
    case EventKind::kIntentParsed: return "IntentParsed";
    case EventKind::kMotionStarted: return "MotionStarted";
    case EventKind::kMotionCompleted: return "MotionCompleted";
    case EventKind::kError: return "Error";
    case EventKind::kFeedbackMessage: return "FeedbackMessage";
    case EventKind::kLatencySample: return "LatencySample";
  }
  return "Unknown";
}

Json to_json(const SessionEvent& event) {
  return {{"seq", event.seq},
          {"command_id", event.command_id},
          {"kind", to_string(event.kind)},
          {"timestamp", event.timestamp},
          {"payload", event.payload}};
}

Json to_json(const RobotPose& pose) { return {{"x", pose.x}, {"y", pose.y}, {"yaw", pose.yaw}}; }

Json to_json(const CommandIntent& intent) {
  return {{"action", to_string(intent.action)},
          {"magnitude", intent.magnitude},
          {"speed", intent.speed},
          {"text", describe(intent)}};
}

Json to_json(const StateSnapshot& state) {
  return {{"pose", to_json(state.pose)},
          {"yaw_deg", state.yaw_deg},
          {"busy", state.busy},
          {"moving", state.moving},
          {"last_intent", state.last_intent ? to_json(*state.last_intent) : Json(nullptr)},
          {"sim_time", state.sim_time},
          {"pending", state.pending},
          {"running", state.running}};
}

Json to_json(const Metrics& metrics) {
  Json latency = nullptr;
  if (metrics.latency) {
    const auto& s = *metrics.latency;
    latency = {{"count", s.count},   {"successes", s.successes}, {"mean_s", s.mean},
               {"raw_mean_s", s.raw_mean}, {"min_s", s.min},   {"max_s", s.max}};
  }
  return {{"submitted", metrics.submitted},
          {"completed", metrics.completed},
          {"failed", metrics.failed},
          {"latency", latency},
          {"recent", metrics.recent}};
}

void EventStream::push(const SessionEvent& event) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) return;
    if (queue_.size() >= capacity_) {
      queue_.pop_front();
      ++dropped_;
    }
    queue_.push_back(event);
  }
  cv_.notify_one();
}

std::optional<SessionEvent> EventStream::pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  SessionEvent e = std::move(queue_.front());
  queue_.pop_front();
  return e;
}

std::vector<SessionEvent> EventStream::drain() {
  std::lock_guard lock(mutex_);
  std::vector<SessionEvent> out(std::make_move_iterator(queue_.begin()),
                                std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

void EventStream::close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool EventStream::closed() const {
  std::lock_guard lock(mutex_);
  return closed_;
}

std::uint64_t EventStream::dropped() const {
  std::lock_guard lock(mutex_);
  return dropped_;
}

Session::Session(SessionConfig config) : Session(std::move(config), nullptr, nullptr) {}

Session::Session(SessionConfig config, std::unique_ptr<llm::ChatProvider> provider,
                 std::unique_ptr<speech::Transcriber> transcriber)
    : config_(std::move(config)),
      provider_(std::move(provider)),
      transcriber_(std::move(transcriber)),
      feedback_(speech::default_feedback_messages(), config_.feedback_seed) {
  validate(config_);
  if (!provider_) {
    switch (config_.provider_kind) {
      case ProviderKind::kMock:
        mock_ = std::make_unique<llm::MockChatServer>(
            schedule_from_spec(config_.mock_latency),
            llm::MockServerConfig{"127.0.0.1", 0, config_.defaults});
        break;
      case ProviderKind::kHttp: {
        llm::ProviderConfig pc = config_.provider;
        if (!pc.api_key) pc.api_key = llm::api_key_from_env();
        provider_ = std::make_unique<llm::HttpChatProvider>(pc);
        break;
      }
      case ProviderKind::kOffline:
        provider_ = std::make_unique<llm::OfflineProvider>(config_.defaults);
        break;
    }
  }
  if (!transcriber_) {
    if (config_.transcriber_kind == TranscriberKind::kHttp) {
      speech::HttpTranscriberConfig stt = config_.stt;
      if (!stt.api_key) stt.api_key = llm::api_key_from_env();
      transcriber_ = std::make_unique<speech::HttpTranscriber>(stt);
    } else if (config_.transcript_manifest) {
      transcriber_ = std::make_unique<speech::MockTranscriber>(
          speech::MockTranscriber::load(*config_.transcript_manifest));
    } else {
      transcriber_ = std::make_unique<speech::MockTranscriber>();
    }
  }
  sim_ = std::make_unique<sim::Simulator>(bus_, config_.sim);
  if (config_.sim.pacing == sim::Pacing::kFast) {
    clock_ = std::make_unique<sim::SimClock>(*sim_);
  } else {
    clock_ = std::make_unique<SteadyClock>();
  }
  controller_ = std::make_unique<control::Controller>(bus_, *clock_, config_.controller);
}

Session::~Session() { shutdown(); }

void Session::start() {
  std::lock_guard lock(lifecycle_mutex_);
  if (shut_down_) throw Error(ErrorCode::kShutdown, "session was shut down");
  if (running_.load()) throw Error(ErrorCode::kAlreadyRunning, "session already started");
  if (config_.event_log) {
    log_.open(*config_.event_log, std::ios::app);
    if (!log_) {
      throw Error(ErrorCode::kConfig, "cannot open event log '" + config_.event_log->string() + "'");
    }
  }
  if (mock_) {
    mock_->start();
    llm::ProviderConfig pc = config_.provider;
    pc.base_url = mock_->base_url();
    provider_ = std::make_unique<llm::HttpChatProvider>(pc);
  }
  sim_->start();
  running_.store(true);
  worker_ = std::thread([this] { worker_loop(); });
}

void Session::shutdown() {
  std::lock_guard lock(lifecycle_mutex_);
  if (shut_down_) return;
  shut_down_ = true;

  std::deque<Job> pending;
  {
    std::lock_guard q(queue_mutex_);
    stopping_ = true;
    pending.swap(queue_);
  }
  queue_cv_.notify_all();

  if (running_.load()) {
    controller_->abort();
    for (const auto& job : pending) {
      emit_error(job.id, ErrorCode::kShutdown, "session shut down before the command ran");
    }
    if (worker_.joinable()) worker_.join();
    try {
      controller_->publish_stop();
    } catch (const std::exception&) {
      // Nothing left to report to: streams close below.
    }
    sim_->stop();
    if (mock_) mock_->stop();
    running_.store(false);
  }
  queue_cv_.notify_all();

  std::lock_guard events(event_mutex_);
  for (auto& weak : streams_) {
    if (auto s = weak.lock()) s->close();
  }
  streams_.clear();
  streams_closed_ = true;
  if (log_.is_open()) log_.close();
}

std::uint64_t Session::submit_command(std::string text) { return enqueue(std::move(text)); }

std::uint64_t Session::submit_audio(speech::AudioClip clip) { return enqueue(std::move(clip)); }

std::uint64_t Session::enqueue(std::variant<std::string, speech::AudioClip> input) {
  std::uint64_t id = 0;
  {
    std::lock_guard lock(queue_mutex_);
    if (stopping_ || !running_.load()) throw Error(ErrorCode::kShutdown, "session is not running");
    if (queue_.size() >= config_.queue_depth) {
      throw Error(ErrorCode::kQueueFull,
                  "command queue is full (" + std::to_string(config_.queue_depth) + " pending)");
    }
    id = next_id_++;
    queue_.push_back({id, std::move(input)});
  }
  {
    std::lock_guard lock(state_mutex_);
    ++submitted_;
  }
  queue_cv_.notify_all();
  return id;
}

void Session::worker_loop() {
  while (true) {
    Job job;
    {
      std::unique_lock lock(queue_mutex_);
      queue_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      job = std::move(queue_.front());
      queue_.pop_front();
      in_flight_ = true;
    }
    process(job);
    {
      std::lock_guard lock(queue_mutex_);
      in_flight_ = false;
    }
    queue_cv_.notify_all();
  }
}

std::size_t Session::terminal_count() const {
  std::lock_guard lock(state_mutex_);
  return completed_ + failed_;
}

void Session::process(Job& job) {
  const std::size_t terminal_before = terminal_count();
  try {
    if (auto* text = std::get_if<std::string>(&job.input)) {
      run_text(job.id, *text);
      return;
    }
    const auto& clip = std::get<speech::AudioClip>(job.input);
    speech::validate(clip);
    const auto voiced = speech::segment(clip, config_.segmenter);
    if (!voiced) {
      emit_error(job.id, ErrorCode::kNoSpeech, "no speech detected in the clip");
      return;
    }
    const auto result = transcriber_->transcribe(*voiced, config_.language);
    if (result.status == speech::TranscriptStatus::kNotUnderstood) {
      emit_error(job.id, ErrorCode::kNotUnderstood, "could not understand audio");
      return;
    }
    if (result.status == speech::TranscriptStatus::kServiceError) {
      emit_error(job.id, ErrorCode::kServiceError, "transcription failed: " + result.detail);
      return;
    }
    run_text(job.id, result.text);
  } catch (const Error& e) {
    if (terminal_count() == terminal_before) emit_error(job.id, e.code(), e.what());
  } catch (const std::exception& e) {
    if (terminal_count() == terminal_before) emit_error(job.id, ErrorCode::kServiceError, e.what());
  }
}

void Session::run_text(std::uint64_t id, const std::string& text) {
  emit(id, EventKind::kTranscriptReceived, {{"text", text}});
  if (blank(text)) {
    emit_error(id, ErrorCode::kEmptyInput, "empty command");
    return;
  }

  llm::LatencyRecord rec;
  rec.command = text;
  rec.provider = provider_->name();
  rec.model = provider_->model();

  llm::Completion completion;
  try {
    completion = provider_->complete(interp::build_prompts(text, config_.defaults));
  } catch (const llm::ProviderFailure& e) {
    rec.t_request = e.t_request();
    rec.t_response = e.t_response();
    rec.error = e.code();
    rec.detail = e.what();
    emit_error(id, e.code(), e.what());
    record_latency(std::move(rec), id);
    return;
  }
  rec.t_request = completion.t_request;
  rec.t_response = completion.t_response;
  rec.detail = completion.content;

  CommandIntent intent;
  try {
    if (completion.content == llm::kUninterpretable) {
      throw Error(ErrorCode::kUninterpretable, "the command was not understood: '" + text + "'");
    }
    intent = interp::parse_response(completion.content);
  } catch (const Error& e) {
    rec.error = e.code();
    emit_error(id, e.code(), e.what());
    record_latency(std::move(rec), id);
    return;
  }
  rec.intent = intent;
  {
    std::lock_guard lock(state_mutex_);
    last_intent_ = intent;
  }
  emit(id, EventKind::kIntentParsed, {{"intent", to_json(intent)}, {"response", completion.content}});
  emit(id, EventKind::kMotionStarted, {{"intent", to_json(intent)}, {"pose", to_json(sim_->pose())}});

  try {
    const control::MotionReport report = controller_->execute(intent);
    emit(id, EventKind::kMotionCompleted,
         {{"pose", to_json(sim_->pose())},
          {"elapsed_s", report.elapsed},
          {"publishes", report.publishes},
          {"achieved_yaw_deg", rad_to_deg(report.achieved_yaw)}});
  } catch (const Error& e) {
    rec.error = e.code();
    emit_error(id, e.code(), e.what());
    record_latency(std::move(rec), id);
    return;
  }
  emit(id, EventKind::kFeedbackMessage, {{"message", feedback_.next()}});
  rec.success = true;
  record_latency(std::move(rec), id);
}

void Session::record_latency(llm::LatencyRecord record, std::uint64_t id) {
  Json payload = {{"latency_s", record.latency()},
                  {"provider", record.provider},
                  {"model", record.model},
                  {"success", record.success}};
  if (record.error) payload["error"] = to_string(*record.error);
  {
    std::lock_guard lock(state_mutex_);
    records_.push_back(std::move(record));
  }
  emit(id, EventKind::kLatencySample, std::move(payload));
}

void Session::emit_error(std::uint64_t id, ErrorCode code, const std::string& message) {
  emit(id, EventKind::kError,
       {{"code", to_string(code)}, {"message", message}, {"pose", to_json(sim_->pose())}});
}

void Session::emit(std::uint64_t id, EventKind kind, Json payload) {
  if (kind == EventKind::kMotionCompleted || kind == EventKind::kError) {
    std::lock_guard lock(state_mutex_);
    (kind == EventKind::kError ? failed_ : completed_)++;
  }
  std::lock_guard lock(event_mutex_);
  SessionEvent event{next_seq_++, id, kind, monotonic_seconds(), std::move(payload)};
  std::erase_if(streams_, [&](const std::weak_ptr<EventStream>& weak) {
    auto s = weak.lock();
    if (!s) return true;
    s->push(event);
    return false;
  });
  if (log_.is_open()) log_ << to_json(event).dump() << '\n' << std::flush;
}

std::shared_ptr<EventStream> Session::subscribe() {
  auto stream = std::make_shared<EventStream>();
  std::lock_guard lock(event_mutex_);
  if (streams_closed_) {
    stream->close();
  } else {
    streams_.push_back(stream);
  }
  return stream;
}

bool Session::wait_idle(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(queue_mutex_);
  return queue_cv_.wait_for(lock, timeout, [&] { return queue_.empty() && !in_flight_; });
}

StateSnapshot Session::state_snapshot() const {
  StateSnapshot s;
  s.pose = sim_->pose();
  s.yaw_deg = rad_to_deg(s.pose.yaw);
  s.sim_time = sim_->time();
  s.moving = controller_->busy();
  s.running = running_.load();
  {
    std::lock_guard lock(queue_mutex_);
    s.busy = in_flight_;
    s.pending = queue_.size();
  }
  std::lock_guard lock(state_mutex_);
  s.last_intent = last_intent_;
  return s;
}

Metrics Session::metrics() const {
  std::lock_guard lock(state_mutex_);
  Metrics m;
  m.submitted = submitted_;
  m.completed = completed_;
  m.failed = failed_;
  if (!records_.empty()) m.latency = bench::summarize(records_);
  const std::size_t first = records_.size() > kRecentLatencies ? records_.size() - kRecentLatencies : 0;
  for (std::size_t i = first; i < records_.size(); ++i) m.recent.push_back(records_[i].latency());
  return m;
}

std::vector<llm::LatencyRecord> Session::latency_records() const {
  std::lock_guard lock(state_mutex_);
  return records_;
}

std::string Session::provider_url() const {
  if (mock_) return mock_->running() ? mock_->base_url() : std::string();
  if (auto* http = dynamic_cast<const llm::HttpChatProvider*>(provider_.get())) {
    return http->config().base_url;
  }
  return {};
}

}  // namespace teleop::service
