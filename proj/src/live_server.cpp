#include "kinesim/live_server.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <set>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace kinesim {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

class WsSession;

struct Event {
  std::weak_ptr<WsSession> session;
  std::string text;
  bool connect{false};
};

}  // namespace

struct LiveServer::Impl {
  Impl(LiveState s, LiveOptions o) : options(std::move(o)), state(std::move(s)), acceptor(ioc) {}

  void enqueue(Event e) {
    {
      std::lock_guard lk(mu);
      queue.push_back(std::move(e));
    }
  }
  void remove(const std::shared_ptr<WsSession>& s) {
    std::lock_guard lk(mu);
    sessions.erase(s);
  }
  void accept();
  void sim_loop();

  // Declared first so that it outlives every socket below.
  net::io_context ioc;
  LiveOptions options;
  LiveState state;
  std::string page;
  std::string doc_bytes;
  tcp::acceptor acceptor;
  std::thread io_thread;
  std::thread sim_thread;
  std::mutex mu;
  std::condition_variable cv;
  std::deque<Event> queue;
  std::set<std::shared_ptr<WsSession>> sessions;
  std::atomic<bool> stopping{false};
  bool stopped{false};
  std::uint16_t bound_port{0};
};

namespace {

using Message = std::shared_ptr<const std::string>;

class WsSession : public std::enable_shared_from_this<WsSession> {
 public:
  WsSession(tcp::socket socket, LiveServer::Impl* server) : ws_(std::move(socket)), server_(server) {}

  void run(http::request<http::string_body> req) {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.text(true);
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) return;
      self->server_->enqueue({self, {}, true});
      self->read();
    });
  }

  // Any thread.
  void send(Message msg) {
    net::post(ws_.get_executor(), [self = shared_from_this(), msg = std::move(msg)] {
      self->outbox_.push_back(msg);
      if (self->outbox_.size() == 1) self->write();
    });
  }

  void close() {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      beast::error_code ec;
      self->ws_.next_layer().socket().shutdown(tcp::socket::shutdown_both, ec);
      self->ws_.next_layer().close();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->server_->remove(self);
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->server_->enqueue({self, std::move(text), false});
      self->read();
    });
  }

  void write() {
    ws_.async_write(net::buffer(*outbox_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->outbox_.clear();
        self->server_->remove(self);
        return;
      }
      self->outbox_.pop_front();
      if (!self->outbox_.empty()) self->write();
    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<Message> outbox_;
  LiveServer::Impl* server_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
 public:
  HttpSession(tcp::socket socket, LiveServer::Impl* server) : stream_(std::move(socket)), server_(server) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (!ec) self->respond();
    });
  }

 private:
  void respond() {
    if (websocket::is_upgrade(req_) && req_.target() == "/ws") {
      stream_.expires_never();
      std::make_shared<WsSession>(stream_.release_socket(), server_)->run(std::move(req_));
      return;
    }
    auto res = std::make_shared<http::response<http::string_body>>();
    res->version(req_.version());
    res->keep_alive(false);
    res->set(http::field::server, "kinesim");
    res->set(http::field::cache_control, "no-store");
    const auto target = req_.target();
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      res->result(http::status::method_not_allowed);
      res->set(http::field::content_type, "text/plain");
      res->body() = "method not allowed\n";
    } else if (target == "/" || target == "/index.html") {
      res->result(http::status::ok);
      res->set(http::field::content_type, "text/html; charset=utf-8");
      res->body() = server_->page;
    } else if (target == "/doc") {
      res->result(http::status::ok);
      res->set(http::field::content_type, "application/json");
      res->body() = server_->doc_bytes;
    } else {
      res->result(http::status::not_found);
      res->set(http::field::content_type, "text/plain");
      res->body() = "not found\n";
    }
    res->prepare_payload();
    if (req_.method() == http::verb::head) res->body().clear();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ec;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
    });
  }

  beast::tcp_stream stream_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
  LiveServer::Impl* server_;
};

}  // namespace

void LiveServer::Impl::accept() {
  acceptor.async_accept([this](beast::error_code ec, tcp::socket socket) {
    if (ec) return;  // acceptor closed
    std::make_shared<HttpSession>(std::move(socket), this)->run();
    accept();
  });
}

void LiveServer::Impl::sim_loop() {
  using clock = std::chrono::steady_clock;
  const double dt = 1.0 / options.frame_rate_hz;
  const auto period = std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(dt));
  auto next = clock::now();
  while (true) {
    next += period;
    std::deque<Event> events;
    {
      std::unique_lock lk(mu);
      cv.wait_until(lk, next, [&] { return stopping.load(); });
      if (stopping) return;
      events.swap(queue);
    }
    // Advance first so that a frame sent after a seek carries the target.
    tick(state, dt);
    bool changed = false;
    std::vector<std::shared_ptr<WsSession>> fresh;
    for (Event& e : events) {
      auto session = e.session.lock();
      if (e.connect) {
        if (!session) continue;
        session->send(std::make_shared<const std::string>(write_canonical(hello_message(state))));
        fresh.push_back(std::move(session));
        continue;
      }
      HandleResult r = handle_text(state, e.text);
      changed = changed || r.changed;
      if (session) session->send(std::make_shared<const std::string>(write_canonical(r.reply)));
    }
    const bool broadcast = state.playing || changed;
    if (!broadcast && fresh.empty()) continue;
    const auto frame = std::make_shared<const std::string>(write_canonical(frame_message(state)));
    std::vector<std::shared_ptr<WsSession>> targets;
    {
      std::lock_guard lk(mu);
      sessions.insert(fresh.begin(), fresh.end());
      if (broadcast) targets.assign(sessions.begin(), sessions.end());
    }
    // Newcomers always get the current frame right after hello.
    if (!broadcast) targets = std::move(fresh);
    for (auto& s : targets) s->send(frame);
  }
}

LiveServer::LiveServer(LiveState state, LiveOptions options)
    : impl_(std::make_unique<Impl>(std::move(state), std::move(options))) {
  Impl& m = *impl_;
  if (!(m.options.frame_rate_hz > 0 && m.options.frame_rate_hz <= 1000)) {
    throw InvalidArgument("frame rate must lie in (0, 1000] Hz");
  }
  const std::string_view bundle =
      m.options.viewer_bundle.empty() ? fallback_viewer_bundle() : std::string_view(m.options.viewer_bundle);
  m.page = export_html(m.state.doc, bundle);
  const auto head = m.page.find("<head>\n");
  m.page.insert(head + 7, "<meta name=\"kinesim-live\" content=\"1\">\n");
  m.doc_bytes = m.options.doc_bytes.empty() ? to_json(m.state.doc) : m.options.doc_bytes;

  beast::error_code ec;
  const auto address = net::ip::make_address(m.options.host, ec);
  if (ec) throw InvalidArgument("bad host address '" + m.options.host + "'");
  const tcp::endpoint endpoint(address, m.options.port);
  m.acceptor.open(endpoint.protocol(), ec);
  if (!ec) m.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) m.acceptor.bind(endpoint, ec);
  if (!ec) m.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    throw EnvironmentError("cannot listen on " + m.options.host + ":" + std::to_string(m.options.port) + ": " +
                           ec.message());
  }
  m.bound_port = m.acceptor.local_endpoint().port();
  m.accept();
  m.io_thread = std::thread([&m] { m.ioc.run(); });
  m.sim_thread = std::thread([&m] { m.sim_loop(); });
}

LiveServer::~LiveServer() { stop(); }

std::uint16_t LiveServer::port() const { return impl_->bound_port; }

void LiveServer::stop() {
  Impl& m = *impl_;
  if (m.stopped) return;
  m.stopped = true;
  m.stopping = true;
  m.cv.notify_all();
  if (m.sim_thread.joinable()) m.sim_thread.join();
  std::vector<std::shared_ptr<WsSession>> open;
  {
    std::lock_guard lk(m.mu);
    open.assign(m.sessions.begin(), m.sessions.end());
    m.sessions.clear();
    m.queue.clear();
  }
  for (auto& s : open) s->close();
  net::post(m.ioc, [&m] {
    beast::error_code ec;
    m.acceptor.close(ec);
  });
  m.ioc.stop();
  if (m.io_thread.joinable()) m.io_thread.join();
}

}  // namespace kinesim
