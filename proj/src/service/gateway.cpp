#include <deque>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "teleop/service.hpp"

namespace teleop::service {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

constexpr std::uint64_t kMaxBody = 16 * 1024 * 1024;  // a minute of 16 kHz float WAV fits
constexpr auto kIdleTimeout = std::chrono::seconds(30);

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response reply(const Request& req, http::status status, const Json& body) {
  Response res{status, req.version()};
  res.set(http::field::server, "teleop-gateway");
  res.set(http::field::content_type, "application/json");
  res.set(http::field::access_control_allow_origin, "*");
  res.keep_alive(req.keep_alive());
  res.body() = body.dump();
  res.prepare_payload();
  return res;
}

Response error_reply(const Request& req, http::status status, ErrorCode code, const std::string& message) {
  return reply(req, status, {{"error", {{"code", to_string(code)}, {"message", message}}}});
}

http::status status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kQueueFull: return http::status::too_many_requests;
    case ErrorCode::kShutdown: return http::status::service_unavailable;
    default: return http::status::bad_request;
  }
}

std::string_view path_of(beast::string_view target) {
  const std::string_view t(target.data(), target.size());
  return t.substr(0, t.find('?'));
}

Response method_not_allowed(const Request& req, const char* allow) {
  Response res = error_reply(req, http::status::method_not_allowed, ErrorCode::kInvalidArgument,
                             "method not allowed");
  res.set(http::field::allow, allow);
  return res;
}

Response handle(Session& session, const Request& req) {
  const std::string_view path = path_of(req.target());
  if (req.method() == http::verb::options) {
    Response res{http::status::no_content, req.version()};
    res.set(http::field::access_control_allow_origin, "*");
    res.set(http::field::access_control_allow_methods, "GET, POST, OPTIONS");
    res.set(http::field::access_control_allow_headers, "Content-Type");
    res.keep_alive(req.keep_alive());
    res.prepare_payload();
    return res;
  }
  try {
    if (path == "/api/command") {
      if (req.method() != http::verb::post) return method_not_allowed(req, "POST");
      const Json body = Json::parse(req.body(), nullptr, false);
      if (body.is_discarded() || !body.is_object() || !body.contains("text") || !body["text"].is_string()) {
        return error_reply(req, http::status::bad_request, ErrorCode::kInvalidArgument,
                           "expected a JSON object with a string field 'text'");
      }
      const auto id = session.submit_command(body["text"].get<std::string>());
      return reply(req, http::status::ok, {{"command_id", id}});
    }
    if (path == "/api/audio") {
      if (req.method() != http::verb::post) return method_not_allowed(req, "POST");
      const auto id = session.submit_audio(speech::decode_wav(req.body()));
      return reply(req, http::status::ok, {{"command_id", id}});
    }
    if (path == "/api/state") {
      if (req.method() != http::verb::get) return method_not_allowed(req, "GET");
      return reply(req, http::status::ok, to_json(session.state_snapshot()));
    }
    if (path == "/api/metrics") {
      if (req.method() != http::verb::get) return method_not_allowed(req, "GET");
      return reply(req, http::status::ok, to_json(session.metrics()));
    }
  } catch (const Error& e) {
    return error_reply(req, status_for(e.code()), e.code(), e.what());
  }
  return error_reply(req, http::status::not_found, ErrorCode::kInvalidArgument,
                     "no route for '" + std::string(path) + "'");
}

Json pose_message(const StateSnapshot& s) {
  return {{"type", "pose"},
          {"pose", to_json(s.pose)},
          {"yaw_deg", s.yaw_deg},
          {"busy", s.busy},
          {"moving", s.moving},
          {"sim_time", s.sim_time}};
}

class StreamConnection : public std::enable_shared_from_this<StreamConnection> {
 public:
  StreamConnection(tcp::socket socket, Session& session, const GatewayConfig& config)
      : ws_(std::move(socket)),
        session_(session),
        timer_(ws_.get_executor()),
        period_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
            std::chrono::duration<double>(1.0 / config.pose_rate))) {}

  void run(Request req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->events_ = self->session_.subscribe();
      self->pump();
      self->tick();
      self->read();
    });
  }

 private:
  void read() {
    ws_.async_read(inbox_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->finish();
        return;
      }
      self->inbox_.consume(self->inbox_.size());
      self->read();
    });
  }

  void tick() {
    timer_.expires_after(period_);
    timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
      if (ec || self->done_) return;
      self->pump();
      if (!self->done_) self->tick();
    });
  }

  // Events go out in emission order; at most one pose per tick.
  void pump() {
    for (const auto& e : events_->drain()) {
      Json msg = to_json(e);
      msg["type"] = "event";
      outbox_.push_back(msg.dump());
    }
    const StateSnapshot s = session_.state_snapshot();
    if (!last_pose_ || *last_pose_ != s.pose || last_busy_ != s.busy) {
      last_pose_ = s.pose;
      last_busy_ = s.busy;
      outbox_.push_back(pose_message(s).dump());
    }
    if (events_->closed()) closing_ = true;
    write_next();
  }

  void write_next() {
    if (writing_ || done_) return;
    if (outbox_.empty()) {
      if (closing_) {
        done_ = true;
        timer_.cancel();
        ws_.async_close(websocket::close_code::going_away,
                        [self = shared_from_this()](beast::error_code) {});
      }
      return;
    }
    writing_ = true;
    ws_.text(true);
    ws_.async_write(net::buffer(outbox_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      self->writing_ = false;
                      if (ec) {
                        self->finish();
                        return;
                      }
                      self->outbox_.pop_front();
                      self->write_next();
                    });
  }

  void finish() {
    done_ = true;
    timer_.cancel();
    events_.reset();
  }

  websocket::stream<beast::tcp_stream> ws_;
  Session& session_;
  net::steady_timer timer_;
  std::chrono::steady_clock::duration period_;
  std::shared_ptr<EventStream> events_;
  beast::flat_buffer inbox_;
  std::deque<std::string> outbox_;
  std::optional<RobotPose> last_pose_;
  bool last_busy_ = false;
  bool writing_ = false;
  bool closing_ = false;
  bool done_ = false;
};

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket socket, Session& session, const GatewayConfig& config)
      : stream_(std::move(socket)), session_(session), config_(config) {}

  void run() {
    net::dispatch(stream_.get_executor(), [self = shared_from_this()] { self->read(); });
  }

 private:
  void read() {
    parser_.emplace();
    parser_->body_limit(kMaxBody);
    stream_.expires_after(kIdleTimeout);
    http::async_read(stream_, buffer_, *parser_,
                     [self = shared_from_this()](beast::error_code ec, std::size_t) { self->on_read(ec); });
  }

  void on_read(beast::error_code ec) {
    if (ec) {
      close();
      return;
    }
    Request req = parser_->release();
    if (websocket::is_upgrade(req) && path_of(req.target()) == "/api/stream") {
      stream_.expires_never();
      std::make_shared<StreamConnection>(stream_.release_socket(), session_, config_)->run(std::move(req));
      return;
    }
    auto res = std::make_shared<Response>(handle(session_, req));
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
      if (ec || !res->keep_alive()) {
        self->close();
        return;
      }
      self->read();
    });
  }

  void close() {
    beast::error_code ignored;
    stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  std::optional<http::request_parser<http::string_body>> parser_;
  Session& session_;
  const GatewayConfig& config_;
};

}  // namespace

struct Gateway::Impl {
  Impl(Session& s, GatewayConfig c) : session(s), config(std::move(c)) {}

  Session& session;
  GatewayConfig config;
  std::unique_ptr<net::io_context> ioc;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread thread;
  std::atomic<bool> running{false};
  int port = 0;

  void accept() {
    acceptor->async_accept(net::make_strand(*ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      std::make_shared<HttpConnection>(std::move(socket), session, config)->run();
      accept();
    });
  }
};

Gateway::Gateway(Session& session, GatewayConfig config)
    : impl_(std::make_unique<Impl>(session, std::move(config))) {
  if (!(impl_->config.pose_rate > 0.0 && impl_->config.pose_rate <= 20.0)) {
    throw Error(ErrorCode::kConfig, "pose rate must be in (0, 20] Hz");
  }
}

Gateway::~Gateway() { stop(); }

void Gateway::start() {
  if (impl_->running.load()) throw Error(ErrorCode::kAlreadyRunning, "gateway already running");
  impl_->ioc = std::make_unique<net::io_context>(1);
  try {
    const tcp::endpoint endpoint{net::ip::make_address(impl_->config.host),
                                 static_cast<unsigned short>(impl_->config.port)};
    impl_->acceptor = std::make_unique<tcp::acceptor>(*impl_->ioc);
    impl_->acceptor->open(endpoint.protocol());
    impl_->acceptor->set_option(net::socket_base::reuse_address(true));
    impl_->acceptor->bind(endpoint);
    impl_->acceptor->listen(net::socket_base::max_listen_connections);
    impl_->port = impl_->acceptor->local_endpoint().port();
  } catch (const boost::system::system_error& e) {
    impl_->acceptor.reset();
    impl_->ioc.reset();
    throw Error(ErrorCode::kConfig, "cannot listen on " + impl_->config.host + ":" +
                                        std::to_string(impl_->config.port) + ": " + e.what());
  }
  impl_->accept();
  impl_->running.store(true);
  impl_->thread = std::thread([impl = impl_.get()] { impl->ioc->run(); });
}

void Gateway::stop() {
  if (!impl_->running.exchange(false)) return;
  net::post(*impl_->ioc, [impl = impl_.get()] {
    beast::error_code ignored;
    impl->acceptor->close(ignored);
  });
  impl_->ioc->stop();
  if (impl_->thread.joinable()) impl_->thread.join();
  // Dropping the context destroys pending handlers and with them every
  // connection they still own.
  impl_->acceptor.reset();
  impl_->ioc.reset();
}

bool Gateway::running() const { return impl_->running.load(); }

int Gateway::port() const { return impl_->port; }

}  // namespace teleop::service
