#include "easyrl/engine/events.hpp"

#include <algorithm>

#include "easyrl/common/error.hpp"

namespace easyrl::engine {

std::string_view toString(SessionStatus status) {
  switch (status) {
    case SessionStatus::Created: return "created";
    case SessionStatus::Running: return "running";
    case SessionStatus::Paused: return "paused";
    case SessionStatus::Finished: return "finished";
    case SessionStatus::Failed: return "failed";
  }
  return "unknown";
}

SessionStatus statusFromString(std::string_view name) {
  for (auto s : {SessionStatus::Created, SessionStatus::Running, SessionStatus::Paused,
                 SessionStatus::Finished, SessionStatus::Failed}) {
    if (toString(s) == name) return s;
  }
  fail(ErrorCode::Argument, "unknown session status '" + std::string(name) + "'");
}

namespace {
nlohmann::json optionalNumber(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}
}  // namespace

void to_json(nlohmann::json& j, const MetricEvent& e) {
  j = {{"sessionId", e.sessionId},
       {"episodeIndex", e.episodeIndex},
       {"totalReward", e.totalReward},
       {"meanLoss", optionalNumber(e.meanLoss)},
       {"epsilon", optionalNumber(e.epsilon)},
       {"stepsInEpisode", e.stepsInEpisode},
       {"wallClockMs", e.wallClockMs}};
}

void to_json(nlohmann::json& j, const FrameEvent& e) {
  j = {{"sessionId", e.sessionId},
       {"episodeIndex", e.episodeIndex},
       {"stepIndex", e.stepIndex},
       {"frame", e.frame}};
}

void to_json(nlohmann::json& j, const StatusEvent& e) {
  j = {{"sessionId", e.sessionId},
       {"status", toString(e.status)},
       {"episodesCompleted", e.episodesCompleted}};
  if (e.message) j["message"] = *e.message;
}

nlohmann::json eventToJson(const Event& e) {
  nlohmann::json j;
  std::visit([&j](const auto& ev) { to_json(j, ev); }, e);
  const char* tag = std::holds_alternative<MetricEvent>(e)  ? "metric"
                    : std::holds_alternative<FrameEvent>(e) ? "frame"
                                                            : "status";
  j["event"] = tag;
  return j;
}

std::optional<Event> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [this] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  Event e = std::move(queue_.front());
  queue_.pop_front();
  if (std::holds_alternative<FrameEvent>(e)) --queuedFrames_;
  return e;
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_ && queue_.empty();
}

std::size_t Subscription::droppedFrames() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void Subscription::push(const Event& e) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (std::holds_alternative<FrameEvent>(e)) {
      if (frameCapacity_ == 0) {
        ++dropped_;
        return;
      }
      if (queuedFrames_ >= frameCapacity_) {
        auto it = std::find_if(queue_.begin(), queue_.end(), [](const Event& q) {
          return std::holds_alternative<FrameEvent>(q);
        });
        queue_.erase(it);
        --queuedFrames_;
        ++dropped_;
      }
      ++queuedFrames_;
    }
    queue_.push_back(e);
  }
  cv_.notify_all();
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

std::shared_ptr<Subscription> Broadcaster::subscribe(std::size_t frameCapacity) {
  auto sub = std::make_shared<Subscription>(frameCapacity);
  std::lock_guard lock(mu_);
  for (const Event& e : history_) sub->push(e);
  if (closed_) {
    sub->close();
  } else {
    subs_.push_back(sub);
  }
  return sub;
}

void Broadcaster::publish(const Event& e) {
  std::vector<std::shared_ptr<Subscription>> live;
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (!std::holds_alternative<FrameEvent>(e)) history_.push_back(e);
    for (auto it = subs_.begin(); it != subs_.end();) {
      if (auto s = it->lock()) {
        live.push_back(std::move(s));
        ++it;
      } else {
        it = subs_.erase(it);
      }
    }
    // Delivering under the lock keeps per-subscriber order identical to
    // publish order when several threads publish.
    for (auto& s : live) s->push(e);
  }
}

void Broadcaster::close() {
  std::vector<std::weak_ptr<Subscription>> subs;
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    subs.swap(subs_);
  }
  for (auto& w : subs) {
    if (auto s = w.lock()) s->close();
  }
}

}  // namespace easyrl::engine
