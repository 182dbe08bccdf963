#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <sys/types.h>
#include <vector>

namespace easyrl::plugin {

// A child process with its stdin/stdout connected to pipes. stderr is
// inherited.
class ChildProcess {
 public:
  enum class ReadStatus { Line, Timeout, Closed };

  // Throws PluginSpawn if the executable cannot be started.
  explicit ChildProcess(const std::vector<std::string>& argv);
  ~ChildProcess();

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  // False if the write failed (child gone or stdin closed).
  bool writeLine(const std::string& line);
  ReadStatus readLine(std::string& line, std::chrono::milliseconds timeout);

  // Exit status if the child has exited (reaps it), nullopt if still running.
  std::optional<int> poll();
  void kill();
  pid_t pid() const { return pid_; }

 private:
  pid_t pid_ = -1;
  int in_ = -1;   // child's stdin
  int out_ = -1;  // child's stdout
  std::string buffer_;
  bool eof_ = false;
  std::optional<int> exitStatus_;
};

}  // namespace easyrl::plugin
