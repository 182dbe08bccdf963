#include "easyrl/plugin/process.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <fcntl.h>
#include <mutex>
#include <poll.h>
#include <sys/wait.h>
#include <thread>
#include <unistd.h>

#include "easyrl/common/error.hpp"

namespace easyrl::plugin {
namespace {

void ignoreSigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

void closeFd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

std::string joinArgv(const std::vector<std::string>& argv) {
  std::string s;
  for (const auto& a : argv) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

}  // namespace

ChildProcess::ChildProcess(const std::vector<std::string>& argv) {
  if (argv.empty()) fail(ErrorCode::PluginSpawn, "empty plugin command");
  ignoreSigpipe();

  std::vector<char*> cargv;
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  int toChild[2], fromChild[2], status[2];
  if (::pipe2(toChild, O_CLOEXEC) != 0) fail(ErrorCode::PluginSpawn, std::strerror(errno));
  if (::pipe2(fromChild, O_CLOEXEC) != 0) {
    ::close(toChild[0]);
    ::close(toChild[1]);
    fail(ErrorCode::PluginSpawn, std::strerror(errno));
  }
  if (::pipe2(status, O_CLOEXEC) != 0) {
    for (int fd : {toChild[0], toChild[1], fromChild[0], fromChild[1]}) ::close(fd);
    fail(ErrorCode::PluginSpawn, std::strerror(errno));
  }

  pid_ = ::fork();
  if (pid_ < 0) {
    for (int fd : {toChild[0], toChild[1], fromChild[0], fromChild[1], status[0], status[1]}) {
      ::close(fd);
    }
    fail(ErrorCode::PluginSpawn, std::strerror(errno));
  }
  if (pid_ == 0) {
    // only async-signal-safe calls from here on
    ::dup2(toChild[0], STDIN_FILENO);
    ::dup2(fromChild[1], STDOUT_FILENO);
    ::execvp(cargv[0], cargv.data());
    int err = errno;
    [[maybe_unused]] auto n = ::write(status[1], &err, sizeof err);
    ::_exit(127);
  }

  ::close(toChild[0]);
  ::close(fromChild[1]);
  ::close(status[1]);
  in_ = toChild[1];
  out_ = fromChild[0];

  int err = 0;
  ssize_t n;
  do {
    n = ::read(status[0], &err, sizeof err);
  } while (n < 0 && errno == EINTR);
  ::close(status[0]);
  if (n == sizeof err) {
    ::waitpid(pid_, nullptr, 0);
    pid_ = -1;
    closeFd(in_);
    closeFd(out_);
    fail(ErrorCode::PluginSpawn,
         "cannot start '" + joinArgv(argv) + "': " + std::strerror(err));
  }
}

ChildProcess::~ChildProcess() {
  closeFd(in_);
  if (pid_ > 0 && !exitStatus_) {
    // give a well-behaved plugin a moment to exit on EOF
    for (int i = 0; i < 20 && !poll(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    if (!exitStatus_) kill();
  }
  closeFd(out_);
}

bool ChildProcess::writeLine(const std::string& line) {
  if (in_ < 0) return false;
  std::string data = line;
  data += '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(in_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    off += static_cast<std::size_t>(n);
  }
  return true;
}

ChildProcess::ReadStatus ChildProcess::readLine(std::string& line,
                                                std::chrono::milliseconds timeout) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return ReadStatus::Line;
    }
    if (eof_) return ReadStatus::Closed;

    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) return ReadStatus::Timeout;
    pollfd pfd{out_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (rc < 0) {
      if (errno == EINTR) continue;
      eof_ = true;
      continue;
    }
    if (rc == 0) return ReadStatus::Timeout;
    char chunk[4096];
    ssize_t n = ::read(out_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      eof_ = true;
    } else if (n == 0) {
      eof_ = true;
    } else {
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }
}

std::optional<int> ChildProcess::poll() {
  if (exitStatus_ || pid_ <= 0) return exitStatus_;
  int st = 0;
  pid_t r = ::waitpid(pid_, &st, WNOHANG);
  if (r == pid_) {
    exitStatus_ = WIFEXITED(st) ? WEXITSTATUS(st) : 128 + WTERMSIG(st);
  }
  return exitStatus_;
}

void ChildProcess::kill() {
  if (pid_ <= 0 || exitStatus_) return;
  ::kill(pid_, SIGKILL);
  int st = 0;
  while (::waitpid(pid_, &st, 0) < 0 && errno == EINTR) {
  }
  exitStatus_ = 128 + SIGKILL;
}

}  // namespace easyrl::plugin
