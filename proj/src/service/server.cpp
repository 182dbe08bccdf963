#include "easyrl/service/server.hpp"

#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace easyrl::service {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;

ServerOptions parseAddress(const std::string& address) {
  auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    fail(ErrorCode::Argument, "address must be HOST:PORT, got '" + address + "'");
  }
  ServerOptions o;
  o.host = address.substr(0, colon);
  try {
    std::size_t used = 0;
    const int port = std::stoi(address.substr(colon + 1), &used);
    if (used != address.size() - colon - 1 || port < 0 || port > 65535) throw std::out_of_range("");
    o.port = static_cast<unsigned short>(port);
  } catch (const std::exception&) {
    fail(ErrorCode::Argument, "bad port in address '" + address + "'");
  }
  return o;
}

std::string defaultAddress() {
  const char* env = std::getenv("EASYRL_ADDR");
  return env && *env ? env : "127.0.0.1:8080";
}

namespace {

std::string mimeType(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".html") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

std::string streamSessionId(const std::string& target) {
  const auto p = apiPath(target);
  if (p.size() == 3 && p[0] == "sessions" && p[2] == "stream") return p[1];
  return {};
}

}  // namespace

struct Server::Impl {
  asio::io_context io;
  std::unique_ptr<tcp::acceptor> acceptor;
  std::thread acceptThread;
  std::mutex mu;
  std::condition_variable cv;
  std::list<std::shared_ptr<tcp::socket>> sockets;
  std::size_t active = 0;
  std::atomic<bool> stopping{false};
  bool stopped = false;
};

namespace {

using Request = http::request<http::string_body>;
using Response = http::response<http::string_body>;

Response makeResponse(const Request& req, const HttpResponse& r) {
  Response res{static_cast<http::status>(r.status), req.version()};
  res.set(http::field::server, "easyrl");
  res.set(http::field::content_type, r.contentType);
  for (const auto& [k, v] : r.headers) res.set(k, v);
  res.keep_alive(req.keep_alive());
  res.body() = r.body;
  res.prepare_payload();
  return res;
}

HttpResponse serveStatic(const std::filesystem::path& root, const std::string& target) {
  HttpResponse notFound{404, "application/json",
                        R"({"code":"not_found","message":"no such file"})", {}};
  if (root.empty() || !std::filesystem::is_directory(root)) return notFound;
  std::string rel = target.substr(0, target.find('?'));
  if (rel.find("..") != std::string::npos) return notFound;
  while (!rel.empty() && rel.front() == '/') rel.erase(0, 1);
  if (rel.empty()) rel = "index.html";
  const auto path = root / rel;
  std::ifstream in(path, std::ios::binary);
  if (!in || std::filesystem::is_directory(path)) return notFound;
  std::ostringstream body;
  body << in.rdbuf();
  return {200, mimeType(path), body.str(), {}};
}

void streamEvents(Api& api, tcp::socket& sock, Request& req, const std::atomic<bool>& stopping) {
  websocket::stream<tcp::socket&> ws(sock);
  beast::error_code ec;
  ws.accept(req, ec);
  if (ec) return;
  ws.text(true);
  std::shared_ptr<engine::Subscription> sub;
  try {
    sub = api.engine().subscribe(streamSessionId(std::string(req.target())));
  } catch (const Error& e) {
    const ApiError err = toApiError(e.code(), e.what());
    Json j = {{"event", "error"}, {"code", err.code}, {"message", err.message}};
    ws.write(asio::buffer(j.dump()), ec);
    ws.close(websocket::close_reason(websocket::close_code::policy_error, err.code), ec);
    return;
  }
  while (!stopping) {
    auto ev = sub->next(std::chrono::milliseconds(200));
    if (ev) {
      ws.write(asio::buffer(engine::eventToJson(*ev).dump()), ec);
      if (ec) return;
    } else if (sub->closed()) {
      break;
    }
  }
  ws.close(websocket::close_code::normal, ec);
}

void serveConnection(Api& api, const ServerOptions& options, tcp::socket& sock,
                     const std::atomic<bool>& stopping) {
  beast::flat_buffer buffer;
  beast::error_code ec;
  while (!stopping) {
    http::request_parser<http::string_body> parser;
    parser.body_limit(256u << 20);
    http::read(sock, buffer, parser, ec);
    if (ec) break;
    Request req = parser.release();
    const std::string target(req.target());
    if (websocket::is_upgrade(req)) {
      if (!streamSessionId(target).empty()) {
        streamEvents(api, sock, req, stopping);
        break;
      }
    }
    HttpResponse r;
    if (target.rfind("/api/", 0) == 0) {
      r = api.handle(std::string(req.method_string()), target, req.body(),
                     std::string(req[http::field::content_type]));
    } else if (req.method() == http::verb::get) {
      r = serveStatic(options.staticDir, target);
    } else {
      r = {404, "application/json", R"({"code":"not_found","message":"no such route"})", {}};
    }
    http::write(sock, makeResponse(req, r), ec);
    if (ec || !req.keep_alive()) break;
  }
  sock.shutdown(tcp::socket::shutdown_send, ec);
}

}  // namespace

Server::Server(engine::Engine& engine, ServerOptions options)
    : impl_(std::make_unique<Impl>()), api_(engine), options_(std::move(options)) {}

Server::~Server() { stop(); }

void Server::start() {
  auto& im = *impl_;
  beast::error_code ec;
  const auto addr = asio::ip::make_address(options_.host == "localhost" ? "127.0.0.1" : options_.host, ec);
  if (ec) fail(ErrorCode::Argument, "bad listen host '" + options_.host + "': " + ec.message());
  im.acceptor = std::make_unique<tcp::acceptor>(im.io);
  tcp::endpoint ep(addr, options_.port);
  im.acceptor->open(ep.protocol(), ec);
  if (!ec) im.acceptor->set_option(asio::socket_base::reuse_address(true), ec);
  if (!ec) im.acceptor->bind(ep, ec);
  if (!ec) im.acceptor->listen(asio::socket_base::max_listen_connections, ec);
  if (ec) fail(ErrorCode::Io, "cannot listen on " + options_.host + ":" +
                                  std::to_string(options_.port) + ": " + ec.message());
  port_ = im.acceptor->local_endpoint().port();

  im.acceptThread = std::thread([this] {
    auto& im = *impl_;
    for (;;) {
      auto sock = std::make_shared<tcp::socket>(im.io);
      beast::error_code aec;
      im.acceptor->accept(*sock, aec);
      if (im.stopping) return;
      if (aec) continue;
      std::lock_guard lock(im.mu);
      im.sockets.push_back(sock);
      auto it = std::prev(im.sockets.end());
      ++im.active;
      std::thread([this, sock, it]() mutable {
        auto& im = *impl_;
        serveConnection(api_, options_, *sock, im.stopping);
        {
          std::lock_guard lock(im.mu);
          im.sockets.erase(it);
        }
        sock.reset();  // close while the io_context is still alive
        std::lock_guard lock(im.mu);
        --im.active;
        im.cv.notify_all();
      }).detach();
    }
  });
}

void Server::stop() {
  auto& im = *impl_;
  {
    std::lock_guard lock(im.mu);
    if (im.stopped || !im.acceptor) return;
    im.stopped = true;
  }
  im.stopping = true;
  beast::error_code ec;
  im.acceptor->cancel(ec);
  im.acceptor->close(ec);
  // a blocking accept() is not always woken by close(); poke it
  {
    tcp::socket poke(im.io);
    poke.connect(tcp::endpoint(asio::ip::make_address("127.0.0.1"), port_), ec);
  }
  if (im.acceptThread.joinable()) im.acceptThread.join();
  std::unique_lock lock(im.mu);
  for (auto& s : im.sockets) s->shutdown(tcp::socket::shutdown_both, ec);
  im.cv.wait(lock, [&] { return im.active == 0; });
  im.cv.notify_all();
}

void Server::wait() {
  auto& im = *impl_;
  std::unique_lock lock(im.mu);
  im.cv.wait(lock, [&] { return im.stopped; });
}

}  // namespace easyrl::service
