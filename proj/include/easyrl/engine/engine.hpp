#pragma once

#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "easyrl/agents/agent.hpp"
#include "easyrl/engine/catalog.hpp"
#include "easyrl/engine/events.hpp"
#include "easyrl/engine/thread_pool.hpp"
#include "easyrl/store/model_store.hpp"

namespace easyrl::engine {

// Wall records episode durations; None writes 0 so that identical runs
// produce byte-identical results files.
enum class Timing { Wall, None };

std::string_view toString(Timing timing);
Timing timingFromString(std::string_view name);

inline constexpr double kMaxDisplaySpeed = 60.0;

struct SessionConfig {
  std::string envId;
  std::string agentId;  // may be empty when model is set
  agents::Hyperparameters hyperparameters;
  agents::Mode mode = agents::Mode::Train;
  // "Load Model": the agent is rebuilt from the artifact, with the artifact's
  // hyperparameters except episodes, maxStepsPerEpisode and seed, which come
  // from this config.
  std::optional<store::ModelArtifact> model;
  Timing timing = Timing::Wall;
  double displaySpeed = 0.0;  // frames per second, 0 = no frames
};

struct SessionRecord {
  std::string sessionId;
  std::string envId;
  std::string agentId;
  agents::Hyperparameters hyperparameters;
  agents::Mode mode = agents::Mode::Train;
  SessionStatus status = SessionStatus::Created;
  std::string createdAt;
  std::optional<std::string> finishedAt;
  std::optional<std::string> failure;
  std::size_t episodesCompleted = 0;
  double displaySpeed = 0.0;
  Timing timing = Timing::Wall;
};

void to_json(nlohmann::json& j, const SessionRecord& r);

struct Summary {
  std::size_t episodes = 0;
  double meanReward = 0.0;
  double stdReward = 0.0;  // population
  double minReward = 0.0;
  double maxReward = 0.0;
};

void to_json(nlohmann::json& j, const Summary& s);
Summary summarize(std::span<const double> rewards);

struct EngineOptions {
  std::size_t workers = 0;  // 0 = hardware threads
};

class Engine {
 public:
  explicit Engine(EngineOptions options = {},
                  std::shared_ptr<Catalog> catalog = std::make_shared<Catalog>());
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  Catalog& catalog() { return *catalog_; }
  std::size_t workers() const { return pool_.size(); }

  SessionRecord createSession(const SessionConfig& config);

  // command: start | pause | resume | stop | setDisplaySpeed (value in [0, 60]).
  SessionRecord control(const std::string& sessionId, std::string_view command,
                        std::optional<double> value = std::nullopt);
  SessionRecord start(const std::string& sessionId) { return control(sessionId, "start"); }

  SessionRecord get(const std::string& sessionId) const;
  std::vector<SessionRecord> list() const;

  // Blocks until the session is finished or failed.
  SessionRecord wait(const std::string& sessionId);
  // Blocks until the status equals want or the timeout passes.
  SessionRecord waitFor(const std::string& sessionId, SessionStatus want,
                        std::chrono::milliseconds timeout);
  SessionRecord run(const std::string& sessionId);
  std::vector<SessionRecord> runParallel(const std::vector<std::string>& sessionIds);

  std::vector<MetricEvent> metrics(const std::string& sessionId) const;
  std::string resultsCsv(const std::string& sessionId) const;
  std::shared_ptr<Subscription> subscribe(const std::string& sessionId,
                                          std::size_t frameCapacity = 64);

  // Aggregates of a finished test session.
  Summary evaluate(const std::string& sessionId) const;

  // Snapshot of the session's agent. State error while the session is
  // running or before it has run.
  store::ModelArtifact exportModel(const std::string& sessionId) const;

 private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& sessionId) const;
  void schedule(const std::shared_ptr<Session>& s);
  void runSlice(const std::shared_ptr<Session>& s);
  bool runEpisode(Session& s);
  void finish(Session& s, SessionStatus status, std::optional<std::string> failure);

  std::shared_ptr<Catalog> catalog_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t nextId_ = 1;
  ThreadPool pool_;
};

}  // namespace easyrl::engine
