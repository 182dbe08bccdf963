#pragma once

#include <chrono>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

namespace easyrl::engine {

enum class SessionStatus { Created, Running, Paused, Finished, Failed };

std::string_view toString(SessionStatus status);
SessionStatus statusFromString(std::string_view name);
inline bool isTerminal(SessionStatus s) {
  return s == SessionStatus::Finished || s == SessionStatus::Failed;
}

struct MetricEvent {
  std::string sessionId;
  std::size_t episodeIndex = 0;
  double totalReward = 0.0;
  std::optional<double> meanLoss;
  std::optional<double> epsilon;
  std::size_t stepsInEpisode = 0;
  std::int64_t wallClockMs = 0;

  friend bool operator==(const MetricEvent&, const MetricEvent&) = default;
};

struct FrameEvent {
  std::string sessionId;
  std::size_t episodeIndex = 0;
  std::size_t stepIndex = 0;
  nlohmann::json frame;
};

struct StatusEvent {
  std::string sessionId;
  SessionStatus status = SessionStatus::Created;
  std::size_t episodesCompleted = 0;
  std::optional<std::string> message;
};

using Event = std::variant<MetricEvent, FrameEvent, StatusEvent>;

void to_json(nlohmann::json& j, const MetricEvent& e);
void to_json(nlohmann::json& j, const FrameEvent& e);
void to_json(nlohmann::json& j, const StatusEvent& e);
// Tagged with "event": "metric" | "frame" | "status".
nlohmann::json eventToJson(const Event& e);

// One subscriber's queue. Metric and status events are never dropped;
// frames beyond frameCapacity evict the oldest queued frame.
class Subscription {
 public:
  explicit Subscription(std::size_t frameCapacity) : frameCapacity_(frameCapacity) {}

  // Blocks until an event arrives, the timeout passes, or the stream closes.
  // Returns nullopt on timeout or when closed and drained.
  std::optional<Event> next(std::chrono::milliseconds timeout);
  bool closed() const;
  std::size_t droppedFrames() const;

 private:
  friend class Broadcaster;
  void push(const Event& e);
  void close();

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> queue_;
  std::size_t frameCapacity_;
  std::size_t queuedFrames_ = 0;
  std::size_t dropped_ = 0;
  bool closed_ = false;
};

// Fans events out to every subscriber. Late subscribers first receive the
// metric and status history, so nobody misses an episode.
class Broadcaster {
 public:
  std::shared_ptr<Subscription> subscribe(std::size_t frameCapacity = 64);
  void publish(const Event& e);
  // Terminal: closes every subscription, present and future.
  void close();

 private:
  std::mutex mu_;
  std::vector<std::weak_ptr<Subscription>> subs_;
  std::vector<Event> history_;
  bool closed_ = false;
};

}  // namespace easyrl::engine
