// easyrl command-line front end: list, train, test, serve, plugin check, parallel.
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "easyrl/engine/engine.hpp"
#include "easyrl/plugin/conformance.hpp"
#include "easyrl/service/server.hpp"
#include "easyrl/store/results.hpp"

using namespace easyrl;

namespace {

constexpr int kOk = 0;
constexpr int kRunFailure = 1;
constexpr int kUsage = 2;

// Errors that mean the invocation itself was wrong.
bool isUsageError(ErrorCode c) {
  switch (c) {
    case ErrorCode::Argument:
    case ErrorCode::Validation:
    case ErrorCode::NotFound:
    case ErrorCode::Incompatible:
      return true;
    default:
      return false;
  }
}

struct PluginFlags {
  std::vector<std::string> envPlugins;
  std::vector<std::string> agentPlugins;

  void add(CLI::App* cmd) {
    cmd->add_option("--env-plugin", envPlugins, "Register an environment plugin (shell command)");
    cmd->add_option("--agent-plugin", agentPlugins, "Register an agent plugin (shell command)");
  }

  void registerAll(engine::Catalog& catalog) const {
    for (const auto& c : envPlugins) {
      catalog.registerPlugin({plugin::PluginKind::Environment, {"/bin/sh", "-c", c}, plugin::kDefaultTimeout});
    }
    for (const auto& c : agentPlugins) {
      catalog.registerPlugin({plugin::PluginKind::Agent, {"/bin/sh", "-c", c}, plugin::kDefaultTimeout});
    }
  }
};

std::string fmtOptional(const std::optional<double>& v) {
  if (!v) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

void printMetric(const engine::MetricEvent& m) {
  std::printf("episode %zu  reward %g  loss %s  epsilon %s  steps %zu\n", m.episodeIndex,
              m.totalReward, fmtOptional(m.meanLoss).c_str(), fmtOptional(m.epsilon).c_str(),
              m.stepsInEpisode);
  std::fflush(stdout);
}

void printSummary(const engine::Summary& s) {
  std::printf("episodes %zu  mean %g  std %g  min %g  max %g\n", s.episodes, s.meanReward,
              s.stdReward, s.minReward, s.maxReward);
}

// Runs a created session, echoing metric lines when watch is set.
engine::SessionRecord runWatched(engine::Engine& eng, const std::string& id, bool watch) {
  std::shared_ptr<engine::Subscription> sub;
  if (watch) sub = eng.subscribe(id, 0);
  eng.start(id);
  if (watch) {
    while (!sub->closed()) {
      auto ev = sub->next(std::chrono::milliseconds(200));
      if (ev && std::holds_alternative<engine::MetricEvent>(*ev)) {
        printMetric(std::get<engine::MetricEvent>(*ev));
      }
    }
  }
  return eng.wait(id);
}

int reportFailure(const engine::SessionRecord& r) {
  std::cerr << "session " << r.sessionId << " failed: " << r.failure.value_or("unknown error") << '\n';
  return kRunFailure;
}

struct TrainFlags {
  std::string env, agent, out, results, timing = "wall";
  std::vector<std::string> hp;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> episodes;
  bool watch = false;
};

agents::Hyperparameters buildHyperparameters(const agents::Hyperparameters& defaults,
                                             const std::vector<std::string>& pairs,
                                             std::optional<std::uint64_t> seed,
                                             std::optional<std::size_t> episodes) {
  agents::Hyperparameters hp = defaults;
  for (const auto& kv : pairs) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw CLI::ValidationError("--hp", "expected key=value, got '" + kv + "'");
    }
    const auto key = kv.substr(0, eq);
    if ((key == "seed" && seed) || (key == "episodes" && episodes)) {
      throw CLI::ValidationError("--hp", "'" + key + "' given both as --" + key + " and --hp");
    }
    hp.set(key, kv.substr(eq + 1));
  }
  if (seed) hp.seed = *seed;
  if (episodes) hp.episodes = *episodes;
  hp.validate();
  return hp;
}

int cmdList(const std::string& what, bool asJson) {
  engine::Catalog catalog;
  if (what == "agents") {
    if (asJson) {
      nlohmann::json j = catalog.agents();
      std::cout << j.dump(2) << '\n';
      return kOk;
    }
    std::printf("%-10s %-16s %-22s %s\n", "ID", "NAME", "OBSERVATIONS", "DESCRIPTION");
    for (const auto& a : catalog.agents()) {
      std::string kinds;
      for (auto k : a.supportedObsKinds) {
        kinds += kinds.empty() ? "" : ",";
        kinds += k == env::ObsKind::Type::Discrete ? "discrete" : "continuous";
      }
      std::printf("%-10s %-16s %-22s %s\n", a.id.c_str(), a.displayName.c_str(), kinds.c_str(),
                  a.description.c_str());
    }
    return kOk;
  }
  if (asJson) {
    nlohmann::json j = catalog.environments();
    std::cout << j.dump(2) << '\n';
    return kOk;
  }
  std::printf("%-22s %-16s %-8s %-9s %s\n", "ID", "OBSERVATIONS", "ACTIONS", "MAXSTEPS", "POMDP");
  for (const auto& e : catalog.environments()) {
    std::printf("%-22s %-16s %-8zu %-9zu %s\n", e.id.c_str(), env::toString(e.obsKind).c_str(),
                e.actionCount, e.maxEpisodeSteps, e.partiallyObservable ? "yes" : "no");
  }
  return kOk;
}

int cmdTrain(const TrainFlags& f, const PluginFlags& plugins) {
  engine::Engine eng({1});
  plugins.registerAll(eng.catalog());
  engine::SessionConfig cfg;
  cfg.envId = f.env;
  cfg.agentId = f.agent;
  cfg.hyperparameters =
      buildHyperparameters(eng.catalog().agent(f.agent).defaults, f.hp, f.seed, f.episodes);
  cfg.timing = engine::timingFromString(f.timing);
  const auto rec = eng.createSession(cfg);
  const auto done = runWatched(eng, rec.sessionId, f.watch);
  if (!f.results.empty() && !eng.metrics(rec.sessionId).empty()) {
    store::writeResultsCsv(eng.metrics(rec.sessionId), f.results);
  }
  if (done.status != engine::SessionStatus::Finished) return reportFailure(done);
  store::saveModel(eng.exportModel(rec.sessionId), f.out);
  std::printf("trained %s on %s for %zu episodes -> %s\n", done.agentId.c_str(),
              done.envId.c_str(), done.episodesCompleted, f.out.c_str());
  return kOk;
}

struct TestFlags {
  std::string model, env, results, timing = "wall";
  std::size_t episodes = 0;
  std::optional<std::uint64_t> seed;
  bool watch = false;
};

int cmdTest(const TestFlags& f, const PluginFlags& plugins) {
  engine::Engine eng({1});
  plugins.registerAll(eng.catalog());
  engine::SessionConfig cfg;
  cfg.model = store::loadModel(f.model);
  cfg.envId = f.env.empty() ? cfg.model->envId : f.env;
  cfg.mode = agents::Mode::Test;
  cfg.hyperparameters = cfg.model->hyperparameters;
  cfg.hyperparameters.episodes = f.episodes;
  if (f.seed) cfg.hyperparameters.seed = *f.seed;
  cfg.timing = engine::timingFromString(f.timing);
  const auto rec = eng.createSession(cfg);
  const auto done = runWatched(eng, rec.sessionId, f.watch);
  if (!f.results.empty() && !eng.metrics(rec.sessionId).empty()) {
    store::writeResultsCsv(eng.metrics(rec.sessionId), f.results);
  }
  if (done.status != engine::SessionStatus::Finished) return reportFailure(done);
  printSummary(eng.evaluate(rec.sessionId));
  return kOk;
}

int cmdServe(const std::string& addr, std::size_t workers, const std::string& staticDir,
             const PluginFlags& plugins) {
  // Block termination signals in every thread; the main thread collects them.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  engine::Engine eng({workers});
  plugins.registerAll(eng.catalog());
  auto opts = service::parseAddress(addr.empty() ? service::defaultAddress() : addr);
  opts.staticDir = staticDir;
  service::Server server(eng, opts);
  server.start();
  std::printf("listening on http://%s:%u (%zu workers)\n", opts.host.c_str(), server.port(),
              eng.workers());
  std::fflush(stdout);
  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  return kOk;
}

int cmdPluginCheck(const std::string& kind, long timeoutMs, const std::vector<std::string>& command) {
  plugin::PluginSpec spec;
  spec.kind = plugin::pluginKindFromString(kind);
  spec.command = command;
  spec.timeout = std::chrono::milliseconds(timeoutMs);
  const auto report = plugin::checkConformance(spec);
  std::cout << report.format();
  std::cout << "conformance: " << (report.passed() ? "PASS" : "FAIL") << '\n';
  return report.passed() ? kOk : kRunFailure;
}

int cmdParallel(const std::string& runsPath, std::size_t workers, const PluginFlags& plugins) {
  std::ifstream in(runsPath);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + runsPath + "'");
  nlohmann::json runs;
  try {
    runs = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::Validation, std::string("bad runs file: ") + e.what());
  }
  if (!runs.is_array()) throw Error(ErrorCode::Validation, "runs file must be a JSON array");

  engine::Engine eng({workers});
  plugins.registerAll(eng.catalog());
  struct Run {
    std::string id, out, results;
  };
  std::vector<Run> created;
  for (const auto& r : runs) {
    engine::SessionConfig cfg;
    cfg.envId = r.at("env").get<std::string>();
    cfg.agentId = r.at("agent").get<std::string>();
    cfg.hyperparameters = eng.catalog().agent(cfg.agentId).defaults;
    if (r.contains("hp")) agents::applyJson(cfg.hyperparameters, r["hp"]);
    if (r.contains("seed")) cfg.hyperparameters.seed = r["seed"].get<std::uint64_t>();
    if (r.contains("episodes")) cfg.hyperparameters.episodes = r["episodes"].get<std::size_t>();
    cfg.timing = engine::timingFromString(r.value("timing", std::string("wall")));
    created.push_back({eng.createSession(cfg).sessionId, r.value("out", std::string()),
                       r.value("results", std::string())});
  }
  std::vector<std::string> ids;
  for (const auto& c : created) ids.push_back(c.id);
  const auto records = eng.runParallel(ids);

  int rc = kOk;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const auto metrics = eng.metrics(rec.sessionId);
    if (!created[i].results.empty() && !metrics.empty()) {
      store::writeResultsCsv(metrics, created[i].results);
    }
    if (rec.status == engine::SessionStatus::Finished) {
      if (!created[i].out.empty()) store::saveModel(eng.exportModel(rec.sessionId), created[i].out);
      std::vector<double> rewards;
      for (const auto& m : metrics) rewards.push_back(m.totalReward);
      const auto s = engine::summarize(rewards);
      std::printf("%s %s/%s finished  episodes %zu  mean reward %g\n", rec.sessionId.c_str(),
                  rec.agentId.c_str(), rec.envId.c_str(), s.episodes, s.meanReward);
    } else {
      std::printf("%s %s/%s failed: %s\n", rec.sessionId.c_str(), rec.agentId.c_str(),
                  rec.envId.c_str(), rec.failure.value_or("").c_str());
      rc = kRunFailure;
    }
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"easyrl: train, test and serve reinforcement-learning agents"};
  app.require_subcommand(1);

  std::string listWhat;
  bool listJson = false;
  auto* list = app.add_subcommand("list", "List built-in agents or environments");
  list->add_option("what", listWhat, "agents or envs")
      ->required()
      ->check(CLI::IsMember({"agents", "envs"}));
  list->add_flag("--json", listJson, "Print JSON descriptors");

  TrainFlags tf;
  PluginFlags trainPlugins;
  auto* train = app.add_subcommand("train", "Train an agent and save the model");
  train->add_option("--env", tf.env, "Environment id")->required();
  train->add_option("--agent", tf.agent, "Agent id")->required();
  train->add_option("--hp", tf.hp, "Hyperparameter key=value (repeatable)");
  train->add_option("--seed", tf.seed, "Master seed");
  train->add_option("--episodes", tf.episodes, "Episodes to run");
  train->add_option("--out", tf.out, "Model file to write")->required();
  train->add_option("--results", tf.results, "Results CSV to write");
  train->add_option("--timing", tf.timing, "wall or none")->check(CLI::IsMember({"wall", "none"}));
  train->add_flag("--watch", tf.watch, "Print a line per episode");
  trainPlugins.add(train);

  TestFlags sf;
  PluginFlags testPlugins;
  auto* test = app.add_subcommand("test", "Evaluate a saved model greedily");
  test->add_option("--model", sf.model, "Model file")->required();
  test->add_option("--env", sf.env, "Environment id (defaults to the model's)");
  test->add_option("--episodes", sf.episodes, "Episodes to run")->required();
  test->add_option("--seed", sf.seed, "Master seed");
  test->add_option("--results", sf.results, "Results CSV to write");
  test->add_option("--timing", sf.timing, "wall or none")->check(CLI::IsMember({"wall", "none"}));
  test->add_flag("--watch", sf.watch, "Print a line per episode");
  testPlugins.add(test);

  std::string addr, staticDir = "dashboard/dist";
  std::size_t serveWorkers = 0;
  PluginFlags servePlugins;
  auto* serve = app.add_subcommand("serve", "Run the HTTP/WebSocket service");
  serve->add_option("--addr", addr, "HOST:PORT (default $EASYRL_ADDR or 127.0.0.1:8080)");
  serve->add_option("--workers", serveWorkers, "Session worker threads (0 = all cores)");
  serve->add_option("--static", staticDir, "Dashboard bundle directory");
  servePlugins.add(serve);

  std::string pluginKind;
  long timeoutMs = plugin::kDefaultTimeout.count();
  std::vector<std::string> pluginCommand;
  auto* pluginCmd = app.add_subcommand("plugin", "Plugin tools");
  pluginCmd->require_subcommand(1);
  auto* check = pluginCmd->add_subcommand("check", "Run the protocol conformance matrix");
  check->add_option("--kind", pluginKind, "env or agent")
      ->required()
      ->check(CLI::IsMember({"env", "environment", "agent"}));
  check->add_option("--timeout-ms", timeoutMs, "Per-request timeout")->check(CLI::PositiveNumber);
  check->add_option("command", pluginCommand, "Plugin command (after --)")->required();

  std::string runsPath;
  std::size_t parallelWorkers = 0;
  PluginFlags parallelPlugins;
  auto* parallel = app.add_subcommand("parallel", "Run several seeded training sessions at once");
  parallel->add_option("--runs", runsPath, "JSON array of train configs")->required();
  parallel->add_option("--workers", parallelWorkers, "Worker threads (0 = all cores)");
  parallelPlugins.add(parallel);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*list) return cmdList(listWhat, listJson);
    if (*train) return cmdTrain(tf, trainPlugins);
    if (*test) return cmdTest(sf, testPlugins);
    if (*serve) return cmdServe(addr, serveWorkers, staticDir, servePlugins);
    if (*check) return cmdPluginCheck(pluginKind, timeoutMs, pluginCommand);
    if (*parallel) return cmdParallel(runsPath, parallelWorkers, parallelPlugins);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return isUsageError(e.code()) ? kUsage : kRunFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRunFailure;
  }
  return kUsage;
}
