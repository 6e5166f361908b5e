#include "maspc/debug/server.hpp"

#include <deque>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <boost/asio.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace maspc::debug {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using asio::awaitable;
using asio::use_awaitable;
using tcp = asio::ip::tcp;

namespace {

// Closes the protocol session however the connection coroutine ends,
// including destruction of a suspended frame at shutdown.
struct SessionGuard {
  DebugService& service;
  DebugService::SessionId id;
  ~SessionGuard() { service.close_session(id); }
};

std::string_view mime_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html; charset=utf-8";
  if (ext == ".js" || ext == ".mjs") return "text/javascript; charset=utf-8";
  if (ext == ".css") return "text/css; charset=utf-8";
  if (ext == ".json" || ext == ".map") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

// Maps a request target onto ui_dir; nullopt for anything escaping it.
std::optional<std::filesystem::path> static_path(const std::filesystem::path& root, std::string_view target) {
  if (root.empty()) return std::nullopt;
  target = target.substr(0, target.find_first_of("?#"));
  if (target.empty() || target.front() != '/') return std::nullopt;
  std::filesystem::path rel(std::string(target.substr(1)));
  for (const auto& part : rel)
    if (part == "..") return std::nullopt;
  auto full = root / rel;
  if (std::filesystem::is_directory(full)) full /= "index.html";
  if (!std::filesystem::is_regular_file(full)) return std::nullopt;
  return full;
}

}  // namespace

/// Outgoing messages of one session. Writers drain the queue; the timer
/// only serves as a wake-up signal.
struct Outbox {
  explicit Outbox(asio::any_io_executor ex) : signal(ex, std::chrono::steady_clock::time_point::max()) {}

  void push(std::string msg) {
    queue.push_back(std::move(msg));
    signal.cancel_one();
  }

  std::deque<std::string> queue;
  asio::steady_timer signal;
  bool closed = false;
};

struct Server::Impl {
  Impl(DebugService& s, ServerOptions o) : service(s), options(std::move(o)), acceptor(io), ticker(io) {}
  // Coroutine frames still pending are destroyed with `io`, after the
  // other members; they check `alive` before touching them.
  ~Impl() { *alive = false; }

  awaitable<void> accept_loop();
  awaitable<void> tick_loop();
  awaitable<void> serve_connection(tcp::socket socket);
  awaitable<void> serve_tcp(std::shared_ptr<tcp::socket> socket, std::string pending);
  awaitable<void> serve_websocket(std::shared_ptr<websocket::stream<tcp::socket>> ws);
  awaitable<void> serve_static(tcp::socket& socket, const http::request<http::string_body>& req);

  template <typename WriteFn>
  static awaitable<void> drain(std::shared_ptr<Outbox> out, WriteFn write);

  DebugService& service;
  ServerOptions options;
  asio::io_context io;
  tcp::acceptor acceptor;
  asio::steady_timer ticker;
  std::optional<asio::signal_set> signals;
  std::set<std::shared_ptr<tcp::socket>> sockets;  // for stop()
  std::thread thread;
  bool stopping = false;
  std::shared_ptr<bool> alive = std::make_shared<bool>(true);
};

Server::Server(DebugService& service, ServerOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

Server::~Server() {
  stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::uint16_t Server::start() {
  try {
    const tcp::endpoint ep(asio::ip::make_address(impl_->options.address), impl_->options.port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(ep);
    impl_->acceptor.listen();
  } catch (const boost::system::system_error& e) {
    throw Error("E_IO", "cannot listen on " + impl_->options.address + ":" + std::to_string(impl_->options.port) +
                            ": " + e.code().message());
  }
  asio::co_spawn(impl_->io, impl_->accept_loop(), asio::detached);
  asio::co_spawn(impl_->io, impl_->tick_loop(), asio::detached);
  if (impl_->options.stop_on_signal) {
    impl_->signals.emplace(impl_->io, SIGINT, SIGTERM);
    impl_->signals->async_wait([this](const boost::system::error_code& ec, int) {
      if (!ec) stop();
    });
  }
  return impl_->acceptor.local_endpoint().port();
}

void Server::run() { impl_->io.run(); }

void Server::run_in_background() {
  impl_->thread = std::thread([this] { impl_->io.run(); });
}

void Server::stop() {
  asio::post(impl_->io, [impl = impl_.get()] {
    impl->stopping = true;
    boost::system::error_code ec;
    impl->acceptor.close(ec);
    impl->ticker.cancel();
    if (impl->signals) impl->signals->cancel(ec);
    for (const auto& s : impl->sockets) s->close(ec);
    impl->io.stop();
  });
}

awaitable<void> Server::Impl::accept_loop() {
  while (!stopping) {
    boost::system::error_code ec;
    tcp::socket socket = co_await acceptor.async_accept(asio::redirect_error(use_awaitable, ec));
    if (ec) {
      if (ec == asio::error::operation_aborted || !acceptor.is_open()) co_return;
      continue;
    }
    asio::co_spawn(io, serve_connection(std::move(socket)), asio::detached);
  }
}

awaitable<void> Server::Impl::tick_loop() {
  while (!stopping) {
    ticker.expires_after(std::chrono::milliseconds(options.period_ms));
    boost::system::error_code ec;
    co_await ticker.async_wait(asio::redirect_error(use_awaitable, ec));
    if (stopping) co_return;
    service.tick();
  }
}

template <typename WriteFn>
awaitable<void> Server::Impl::drain(std::shared_ptr<Outbox> out, WriteFn write) {
  while (!out->closed) {
    if (out->queue.empty()) {
      boost::system::error_code ec;
      co_await out->signal.async_wait(asio::redirect_error(use_awaitable, ec));
      continue;
    }
    std::string msg = std::move(out->queue.front());
    out->queue.pop_front();
    if (!co_await write(msg)) {
      out->closed = true;
      co_return;
    }
  }
}

awaitable<void> Server::Impl::serve_connection(tcp::socket raw) {
  auto socket = std::make_shared<tcp::socket>(std::move(raw));
  sockets.insert(socket);
  struct Forget {
    Impl* self;
    std::shared_ptr<bool> alive;
    std::shared_ptr<tcp::socket> s;
    ~Forget() {
      if (*alive) self->sockets.erase(s);
    }
  } forget{this, alive, socket};

  // Sniff the transport: HTTP requests start with "GET ".
  beast::flat_buffer buffer;
  boost::system::error_code ec;
  while (buffer.size() < 4) {
    const std::size_t n =
        co_await socket->async_read_some(buffer.prepare(512), asio::redirect_error(use_awaitable, ec));
    if (ec) co_return;
    buffer.commit(n);
  }
  std::string head = beast::buffers_to_string(buffer.data());
  if (head.rfind("GET ", 0) != 0) {
    co_await serve_tcp(socket, std::move(head));
    co_return;
  }

  http::request<http::string_body> req;
  co_await http::async_read(*socket, buffer, req, asio::redirect_error(use_awaitable, ec));
  if (ec) co_return;
  const std::string_view target(req.target().data(), req.target().size());
  if (websocket::is_upgrade(req) && target.substr(0, target.find('?')) == "/debug") {
    auto ws = std::make_shared<websocket::stream<tcp::socket>>(std::move(*socket));
    co_await ws->async_accept(req, asio::redirect_error(use_awaitable, ec));
    if (ec) co_return;
    co_await serve_websocket(ws);
    co_return;
  }
  co_await serve_static(*socket, req);
}

awaitable<void> Server::Impl::serve_tcp(std::shared_ptr<tcp::socket> socket, std::string pending) {
  auto out = std::make_shared<Outbox>(socket->get_executor());
  const auto id = service.open_session([out](const std::string& msg) { out->push(msg + "\n"); });
  SessionGuard guard{service, id};
  asio::co_spawn(io,
                 drain(out,
                       [socket](const std::string& msg) -> awaitable<bool> {
                         boost::system::error_code ec;
                         co_await asio::async_write(*socket, asio::buffer(msg), asio::redirect_error(use_awaitable, ec));
                         co_return !ec;
                       }),
                 asio::detached);

  std::string buf = std::move(pending);
  for (;;) {
    for (auto nl = buf.find('\n'); nl != std::string::npos; nl = buf.find('\n')) {
      std::string line = buf.substr(0, nl);
      buf.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) service.handle(id, line);
    }
    boost::system::error_code ec;
    co_await asio::async_read_until(*socket, asio::dynamic_buffer(buf), '\n', asio::redirect_error(use_awaitable, ec));
    if (ec) break;
  }
  // The peer is gone; stop the writer.
  out->closed = true;
  out->signal.cancel();
}

awaitable<void> Server::Impl::serve_websocket(std::shared_ptr<websocket::stream<tcp::socket>> ws) {
  ws->text(true);
  auto out = std::make_shared<Outbox>(ws->get_executor());
  const auto id = service.open_session([out](const std::string& msg) { out->push(msg); });
  SessionGuard guard{service, id};
  asio::co_spawn(io,
                 drain(out,
                       [ws](const std::string& msg) -> awaitable<bool> {
                         boost::system::error_code ec;
                         co_await ws->async_write(asio::buffer(msg), asio::redirect_error(use_awaitable, ec));
                         co_return !ec;
                       }),
                 asio::detached);

  beast::flat_buffer buffer;
  for (;;) {
    boost::system::error_code ec;
    co_await ws->async_read(buffer, asio::redirect_error(use_awaitable, ec));
    if (ec) break;
    service.handle(id, beast::buffers_to_string(buffer.data()));
    buffer.consume(buffer.size());
  }
  out->closed = true;
  out->signal.cancel();
}

awaitable<void> Server::Impl::serve_static(tcp::socket& socket, const http::request<http::string_body>& req) {
  http::response<http::string_body> res;
  res.version(req.version());
  res.keep_alive(false);
  res.set(http::field::server, "maspc");
  const std::string_view target(req.target().data(), req.target().size());
  if (auto path = static_path(options.ui_dir, target)) {
    std::ifstream in(*path, std::ios::binary);
    std::ostringstream body;
    body << in.rdbuf();
    res.result(http::status::ok);
    res.set(http::field::content_type, std::string(mime_type(*path)));
    res.body() = body.str();
  } else {
    res.result(http::status::not_found);
    res.set(http::field::content_type, "text/plain; charset=utf-8");
    res.body() = "not found\n";
  }
  res.prepare_payload();
  boost::system::error_code ec;
  co_await http::async_write(socket, res, asio::redirect_error(use_awaitable, ec));
  socket.shutdown(tcp::socket::shutdown_both, ec);
}

}  // namespace maspc::debug
