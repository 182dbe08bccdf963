#pragma once

#include <atomic>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "easyrl/service/api.hpp"

namespace easyrl::service {

struct ServerOptions {
  std::string host = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::filesystem::path staticDir;  // dashboard bundle; skipped if missing
};

// "HOST:PORT" -> options; Argument error if malformed.
ServerOptions parseAddress(const std::string& address);
// EASYRL_ADDR when set, otherwise 127.0.0.1:8080.
std::string defaultAddress();

// HTTP + WebSocket front end. One thread per connection.
class Server {
 public:
  Server(engine::Engine& engine, ServerOptions options);
  ~Server();

  // Binds and starts accepting in the background.
  void start();
  void stop();
  // Blocks until stop() is called from another thread (or a signal handler
  // thread).
  void wait();

  unsigned short port() const { return port_; }
  Api& api() { return api_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  Api api_;
  ServerOptions options_;
  unsigned short port_ = 0;
};

}  // namespace easyrl::service
