#include "easyrl/engine/engine.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>
#include <cstdio>

#include "easyrl/common/clock.hpp"
#include "easyrl/common/error.hpp"
#include "easyrl/store/results.hpp"

namespace easyrl::engine {

using Clock = std::chrono::steady_clock;

struct Engine::Session {
  SessionConfig config;
  agents::Hyperparameters hp;  // effective, after model overrides

  mutable std::mutex mu;
  std::condition_variable cv;
  SessionRecord record;
  std::vector<MetricEvent> metrics;

  Broadcaster events;
  std::atomic<bool> pauseRequested{false};
  std::atomic<bool> stopRequested{false};
  std::atomic<double> displaySpeed{0.0};

  // worker-owned while running
  std::unique_ptr<env::Environment> env;
  std::unique_ptr<agents::Agent> agent;
  std::size_t nextEpisode = 0;
  Clock::time_point lastFrame{};
};

std::string_view toString(Timing timing) { return timing == Timing::Wall ? "wall" : "none"; }

Timing timingFromString(std::string_view name) {
  if (name == "wall") return Timing::Wall;
  if (name == "none") return Timing::None;
  fail(ErrorCode::Argument, "timing must be 'wall' or 'none', got '" + std::string(name) + "'");
}

void to_json(nlohmann::json& j, const SessionRecord& r) {
  j = {{"sessionId", r.sessionId},
       {"envId", r.envId},
       {"agentId", r.agentId},
       {"hyperparameters", r.hyperparameters},
       {"mode", agents::toString(r.mode)},
       {"status", toString(r.status)},
       {"createdAt", r.createdAt},
       {"finishedAt", r.finishedAt ? nlohmann::json(*r.finishedAt) : nlohmann::json(nullptr)},
       {"failure", r.failure ? nlohmann::json(*r.failure) : nlohmann::json(nullptr)},
       {"episodesCompleted", r.episodesCompleted},
       {"displaySpeed", r.displaySpeed},
       {"timing", toString(r.timing)}};
}

void to_json(nlohmann::json& j, const Summary& s) {
  j = {{"episodes", s.episodes},
       {"meanReward", s.meanReward},
       {"stdReward", s.stdReward},
       {"minReward", s.minReward},
       {"maxReward", s.maxReward}};
}

Summary summarize(std::span<const double> rewards) {
  Summary s;
  s.episodes = rewards.size();
  if (rewards.empty()) return s;
  double sum = 0.0;
  for (double r : rewards) sum += r;
  s.meanReward = sum / static_cast<double>(rewards.size());
  double sq = 0.0;
  for (double r : rewards) sq += (r - s.meanReward) * (r - s.meanReward);
  s.stdReward = std::sqrt(sq / static_cast<double>(rewards.size()));
  auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  s.minReward = *lo;
  s.maxReward = *hi;
  return s;
}

namespace {

void checkDisplaySpeed(double fps) {
  if (!(fps >= 0.0 && fps <= kMaxDisplaySpeed)) {
    fail(ErrorCode::Argument, "display speed must be in [0, 60] frames/sec");
  }
}

[[noreturn]] void illegal(std::string_view command, SessionStatus status) {
  fail(ErrorCode::State, "cannot " + std::string(command) + " a " + std::string(toString(status)) +
                             " session");
}

}  // namespace

Engine::Engine(EngineOptions options, std::shared_ptr<Catalog> catalog)
    : catalog_(std::move(catalog)), pool_(options.workers) {}

Engine::~Engine() {
  std::lock_guard lock(mu_);
  for (auto& [id, s] : sessions_) s->stopRequested = true;
}

std::shared_ptr<Engine::Session> Engine::find(const std::string& sessionId) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(sessionId);
  if (it == sessions_.end()) fail(ErrorCode::NotFound, "unknown session '" + sessionId + "'");
  return it->second;
}

SessionRecord Engine::createSession(const SessionConfig& config) {
  checkDisplaySpeed(config.displaySpeed);
  agents::Hyperparameters hp = config.hyperparameters;
  std::string agentId = config.agentId;
  const env::EnvDescriptor envDesc = catalog_->environment(config.envId);
  if (config.model) {
    const auto& m = *config.model;
    if (!agentId.empty() && agentId != m.agentId) {
      fail(ErrorCode::Argument, "model holds agent '" + m.agentId + "', not '" + agentId + "'");
    }
    agentId = m.agentId;
    store::checkArtifactCompatible(m, envDesc);
    hp = m.hyperparameters;
    hp.episodes = config.hyperparameters.episodes;
    hp.maxStepsPerEpisode = config.hyperparameters.maxStepsPerEpisode;
    hp.seed = config.hyperparameters.seed;
  }
  hp.validate();
  checkCompatible(catalog_->agent(agentId), envDesc);

  auto s = std::make_shared<Session>();
  s->config = config;
  s->config.agentId = agentId;
  s->hp = hp;
  s->displaySpeed = config.displaySpeed;
  SessionRecord& r = s->record;
  r.envId = config.envId;
  r.agentId = agentId;
  r.hyperparameters = hp;
  r.mode = config.mode;
  r.createdAt = utcTimestamp();
  r.displaySpeed = config.displaySpeed;
  r.timing = config.timing;

  std::lock_guard lock(mu_);
  char id[32];
  std::snprintf(id, sizeof id, "s%06llu", static_cast<unsigned long long>(nextId_++));
  r.sessionId = id;
  sessions_[r.sessionId] = s;
  return r;
}

SessionRecord Engine::control(const std::string& sessionId, std::string_view command,
                              std::optional<double> value) {
  auto s = find(sessionId);
  std::unique_lock lock(s->mu);
  SessionRecord& r = s->record;
  if (command == "start") {
    if (r.status != SessionStatus::Created) illegal(command, r.status);
    r.status = SessionStatus::Running;
    s->events.publish(StatusEvent{r.sessionId, r.status, r.episodesCompleted, std::nullopt});
    lock.unlock();
    schedule(s);
    lock.lock();
  } else if (command == "pause") {
    if (r.status != SessionStatus::Running) illegal(command, r.status);
    s->pauseRequested = true;
  } else if (command == "resume") {
    if (r.status == SessionStatus::Running && s->pauseRequested) {
      s->pauseRequested = false;
    } else if (r.status == SessionStatus::Paused) {
      r.status = SessionStatus::Running;
      s->events.publish(StatusEvent{r.sessionId, r.status, r.episodesCompleted, std::nullopt});
      lock.unlock();
      schedule(s);
      lock.lock();
    } else {
      illegal(command, r.status);
    }
  } else if (command == "stop") {
    if (r.status == SessionStatus::Running) {
      s->stopRequested = true;
    } else if (r.status == SessionStatus::Paused) {
      lock.unlock();
      finish(*s, SessionStatus::Finished, std::nullopt);
      lock.lock();
    } else {
      illegal(command, r.status);
    }
  } else if (command == "setDisplaySpeed") {
    if (isTerminal(r.status)) illegal(command, r.status);
    if (!value) fail(ErrorCode::Argument, "setDisplaySpeed needs a value");
    checkDisplaySpeed(*value);
    s->displaySpeed = *value;
    r.displaySpeed = *value;
  } else {
    fail(ErrorCode::Argument, "unknown command '" + std::string(command) +
                                  "' (start, pause, resume, stop, setDisplaySpeed)");
  }
  return r;
}

void Engine::schedule(const std::shared_ptr<Session>& s) {
  pool_.submit([this, s] { runSlice(s); });
}

void Engine::runSlice(const std::shared_ptr<Session>& s) {
  try {
    if (!s->agent) {
      s->env = catalog_->createEnvironment(s->config.envId);
      s->agent = catalog_->createAgent(s->config.agentId, s->env->descriptor(), s->hp);
      if (s->config.model) s->agent->deserialize(s->config.model->sections);
    }
    while (s->nextEpisode < s->hp.episodes) {
      if (s->stopRequested) break;
      if (s->pauseRequested) {
        std::lock_guard lock(s->mu);
        s->pauseRequested = false;
        s->record.status = SessionStatus::Paused;
        s->events.publish(StatusEvent{s->record.sessionId, s->record.status,
                                      s->record.episodesCompleted, std::nullopt});
        s->cv.notify_all();
        return;
      }
      if (runEpisode(*s)) break;
    }
    finish(*s, SessionStatus::Finished, std::nullopt);
  } catch (const std::exception& e) {
    finish(*s, SessionStatus::Failed, std::string(e.what()));
  }
}

bool Engine::runEpisode(Session& s) {
  const bool train = s.config.mode == agents::Mode::Train;
  const std::size_t episode = s.nextEpisode;
  const auto t0 = Clock::now();

  env::StepResult current =
      episode == 0 ? s.env->reset(s.hp.seed) : s.env->reset();
  s.agent->beginEpisode();
  double total = 0.0;
  double lossSum = 0.0;
  std::size_t lossCount = 0;
  std::size_t steps = 0;
  auto record = [&](std::optional<double> loss) {
    if (loss) {
      lossSum += *loss;
      ++lossCount;
    }
  };

  while (!current.done && steps < s.hp.maxStepsPerEpisode) {
    if (s.stopRequested) return true;
    const std::size_t action = s.agent->chooseAction(current.observation, s.config.mode);
    env::StepResult next = s.env->step(action);
    if (train) {
      s.agent->observe({current.observation, action, next.reward, next.observation, next.done});
      record(s.agent->update());
    }
    total += next.reward;
    ++steps;
    current = std::move(next);

    const double fps = s.displaySpeed.load();
    if (fps > 0.0) {
      const auto now = Clock::now();
      if (now - s.lastFrame >= std::chrono::duration<double>(1.0 / fps)) {
        s.lastFrame = now;
        s.events.publish(FrameEvent{s.record.sessionId, episode, steps, s.env->render()});
      }
    }
  }
  if (train) {
    s.agent->endEpisode();
    record(s.agent->update());
  }

  MetricEvent m;
  m.sessionId = s.record.sessionId;
  m.episodeIndex = episode;
  m.totalReward = total;
  if (lossCount > 0) m.meanLoss = lossSum / static_cast<double>(lossCount);
  const auto eps = s.agent->epsilon();
  if (eps) m.epsilon = train ? *eps : 0.0;
  m.stepsInEpisode = steps;
  if (s.config.timing == Timing::Wall) {
    m.wallClockMs =
        std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
  }
  {
    std::lock_guard lock(s.mu);
    s.metrics.push_back(m);
    s.record.episodesCompleted = episode + 1;
    s.events.publish(m);
  }
  s.nextEpisode = episode + 1;
  return false;
}

void Engine::finish(Session& s, SessionStatus status, std::optional<std::string> failure) {
  std::lock_guard lock(s.mu);
  s.record.status = status;
  s.record.failure = failure;
  s.record.finishedAt = utcTimestamp();
  s.events.publish(StatusEvent{s.record.sessionId, status, s.record.episodesCompleted, failure});
  s.events.close();
  // the env is never needed again; a plugin env's process exits here
  s.env.reset();
  s.cv.notify_all();
}

SessionRecord Engine::get(const std::string& sessionId) const {
  auto s = find(sessionId);
  std::lock_guard lock(s->mu);
  return s->record;
}

std::vector<SessionRecord> Engine::list() const {
  std::vector<std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(mu_);
    for (const auto& [id, s] : sessions_) all.push_back(s);
  }
  std::vector<SessionRecord> out;
  for (const auto& s : all) {
    std::lock_guard lock(s->mu);
    out.push_back(s->record);
  }
  return out;
}

SessionRecord Engine::wait(const std::string& sessionId) {
  auto s = find(sessionId);
  std::unique_lock lock(s->mu);
  s->cv.wait(lock, [&] { return isTerminal(s->record.status); });
  return s->record;
}

SessionRecord Engine::waitFor(const std::string& sessionId, SessionStatus want,
                              std::chrono::milliseconds timeout) {
  auto s = find(sessionId);
  std::unique_lock lock(s->mu);
  s->cv.wait_for(lock, timeout, [&] {
    return s->record.status == want || isTerminal(s->record.status);
  });
  return s->record;
}

SessionRecord Engine::run(const std::string& sessionId) {
  start(sessionId);
  return wait(sessionId);
}

std::vector<SessionRecord> Engine::runParallel(const std::vector<std::string>& sessionIds) {
  for (const auto& id : sessionIds) start(id);
  std::vector<SessionRecord> out;
  for (const auto& id : sessionIds) out.push_back(wait(id));
  return out;
}

std::vector<MetricEvent> Engine::metrics(const std::string& sessionId) const {
  auto s = find(sessionId);
  std::lock_guard lock(s->mu);
  return s->metrics;
}

std::string Engine::resultsCsv(const std::string& sessionId) const {
  return store::formatResultsCsv(metrics(sessionId));
}

std::shared_ptr<Subscription> Engine::subscribe(const std::string& sessionId,
                                                std::size_t frameCapacity) {
  return find(sessionId)->events.subscribe(frameCapacity);
}

Summary Engine::evaluate(const std::string& sessionId) const {
  auto s = find(sessionId);
  std::lock_guard lock(s->mu);
  if (s->record.mode != agents::Mode::Test) {
    fail(ErrorCode::State, "evaluate needs a test session");
  }
  if (s->record.status != SessionStatus::Finished) {
    fail(ErrorCode::State, "evaluate needs a finished session, this one is " +
                               std::string(toString(s->record.status)));
  }
  std::vector<double> rewards;
  for (const auto& m : s->metrics) rewards.push_back(m.totalReward);
  return summarize(rewards);
}

store::ModelArtifact Engine::exportModel(const std::string& sessionId) const {
  auto s = find(sessionId);
  std::lock_guard lock(s->mu);
  if (s->record.status == SessionStatus::Running) {
    fail(ErrorCode::State, "cannot save the model of a running session; pause it first");
  }
  if (!s->agent) fail(ErrorCode::State, "session has no trained agent yet");
  store::ModelArtifact a;
  a.agentId = s->record.agentId;
  a.envId = s->record.envId;
  a.env = s->env ? s->env->descriptor() : catalog_->environment(s->record.envId);
  a.hyperparameters = s->hp;
  a.episodesCompleted = s->record.episodesCompleted;
  if (s->config.model && s->config.mode == agents::Mode::Test) {
    a.episodesCompleted = s->config.model->episodesCompleted;
  }
  a.createdAt = utcTimestamp();
  a.sections = s->agent->serialize();
  return a;
}

}  // namespace easyrl::engine
