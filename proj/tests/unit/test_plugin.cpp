#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "easyrl/common/error.hpp"
#include "easyrl/common/rng.hpp"
#include "easyrl/engine/engine.hpp"
#include "easyrl/env/cart_pole.hpp"
#include "easyrl/plugin/conformance.hpp"
#include "easyrl/plugin/plugin.hpp"
#include "support/paths.hpp"

using namespace easyrl;
using namespace easyrl::plugin;
using namespace std::chrono_literals;

namespace {

Error errorOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  FAIL("no error thrown");
  return Error(ErrorCode::Internal, "");
}

PluginSpec faulty(const std::string& fault, std::chrono::milliseconds timeout = kDefaultTimeout) {
  auto kind = fault == "bad_action" ? PluginKind::Agent : PluginKind::Environment;
  return {kind, testpaths::pythonCommand("faulty_plugin.py", {"--fault", fault}), timeout};
}

bool contains(const std::string& text, const std::string& part) {
  return text.find(part) != std::string::npos;
}

}  // namespace

TEST_SUITE("plugin") {

TEST_CASE("line parsing reports the byte offset") {
  CHECK(parsePluginLine(R"({"type":"ok"})")["type"] == "ok");
  auto e = errorOf([] { parsePluginLine(R"({"type": ok})"); });
  CHECK((e.code() == ErrorCode::PluginParse));
  CHECK(contains(e.what(), "offset 9"));
  CHECK(contains(e.what(), R"({"type": ok})"));
  CHECK((errorOf([] { parsePluginLine("[1,2]"); }).code() == ErrorCode::PluginParse));
  CHECK((errorOf([] { parsePluginLine(R"({"kind":"ok"})"); }).code() == ErrorCode::PluginParse));
}

TEST_CASE("echo environment handshake and steps") {
  PluginEnvironment env(testpaths::envPlugin("echo_env.py"));
  const auto& d = env.descriptor();
  CHECK(d.id == "Echo-v0");
  CHECK(d.actionCount == 2);
  CHECK(d.maxEpisodeSteps == 10);
  auto first = env.reset(1);
  CHECK(first.observation.values()[0] == 0.0);
  double total = 0;
  bool done = false;
  for (int t = 0; t < 10; ++t) {
    auto r = env.step(t % 2);
    CHECK(r.observation.values()[0] == double(t % 2));
    total += r.reward;
    done = r.done;
  }
  CHECK(done);
  CHECK(total == 5.0);
  CHECK(env.render()["t"] == 10);
  CHECK((errorOf([&] { env.step(0); }).code() == ErrorCode::Contract));
  CHECK((errorOf([&] { env.reset(); env.step(5); }).code() == ErrorCode::Argument));
}

TEST_CASE("faulty plugins raise the matching errors") {
  SUBCASE("protocol version") {
    auto e = errorOf([] { PluginEnvironment env(faulty("version")); });
    CHECK((e.code() == ErrorCode::PluginVersion));
    CHECK(contains(e.what(), "2"));
  }
  SUBCASE("garbage reply") {
    PluginEnvironment env(faulty("garbage"));
    auto e = errorOf([&] { env.reset(); });
    CHECK((e.code() == ErrorCode::PluginParse));
    CHECK(contains(e.what(), "at offset"));
    CHECK(contains(e.what(), "this is not json"));
  }
  SUBCASE("wrong observation size") {
    PluginEnvironment env(faulty("bad_dim"));
    auto e = errorOf([&] { env.reset(); });
    CHECK((e.code() == ErrorCode::PluginContract));
    // the handle is gone after a violation
    CHECK((errorOf([&] { env.reset(); }).code() == ErrorCode::PluginDeath));
  }
  SUBCASE("timeout") {
    PluginEnvironment env(faulty("timeout", 300ms));
    env.reset();
    const auto t0 = std::chrono::steady_clock::now();
    auto e = errorOf([&] { env.step(0); });
    CHECK((e.code() == ErrorCode::PluginTimeout));
    CHECK(std::chrono::steady_clock::now() - t0 < 5s);
  }
  SUBCASE("process exit") {
    PluginEnvironment env(faulty("early_exit"));
    env.reset();
    auto e = errorOf([&] { env.step(0); });
    CHECK((e.code() == ErrorCode::PluginDeath));
  }
  SUBCASE("action out of range") {
    engine::Catalog catalog;
    auto lake = catalog.environment("FrozenLake-v0");
    PluginAgent agent(faulty("bad_action"), lake, {});
    auto e = errorOf([&] { agent.chooseAction(env::Observation::discrete(0), agents::Mode::Train); });
    CHECK((e.code() == ErrorCode::PluginContract));
    CHECK(contains(e.what(), "7"));
  }
  SUBCASE("missing executable") {
    PluginSpec spec{PluginKind::Environment, {"/nonexistent/plugin"}, 2s};
    auto e = errorOf([&] { PluginEnvironment env(spec); });
    CHECK(((e.code() == ErrorCode::PluginSpawn) || (e.code() == ErrorCode::PluginDeath)));
  }
}

TEST_CASE("cartpole plugin matches the in-process env") {
  PluginEnvironment remote(testpaths::envPlugin("cartpole_env.py"));
  env::CartPole local;
  CHECK((remote.descriptor().obsKind == local.descriptor().obsKind));
  CHECK(remote.descriptor().actionCount == local.descriptor().actionCount);
  Rng actions(11);
  for (std::uint64_t seed : {0u, 1u, 42u}) {
    CAPTURE(seed);
    auto a = remote.reset(seed), b = local.reset(seed);
    CHECK((a.observation == b.observation));
    for (int t = 0; t < 600; ++t) {
      const auto act = actions.uniformInt(2);
      a = remote.step(act);
      b = local.step(act);
      REQUIRE((a.observation == b.observation));
      CHECK(a.reward == b.reward);
      CHECK(a.done == b.done);
      if (a.done) break;
    }
  }
}

TEST_CASE("random agent plugin runs a lake session and round trips") {
  engine::Engine eng({1});
  const auto agentId = eng.catalog().registerPlugin(testpaths::agentPlugin("random_agent.py"));
  CHECK(agentId == "py-random");
  CHECK(eng.catalog().registerPlugin(testpaths::agentPlugin("random_agent.py")) == agentId);
  engine::SessionConfig c;
  c.envId = "FrozenLake-v0";
  c.agentId = agentId;
  c.hyperparameters.episodes = 20;
  c.timing = engine::Timing::None;
  auto id = eng.createSession(c).sessionId;
  auto rec = eng.run(id);
  CHECK((rec.status == engine::SessionStatus::Finished));
  auto m = eng.metrics(id);
  CHECK(m.size() == 20);
  for (const auto& e : m) CHECK_FALSE(e.meanLoss.has_value());

  auto model = eng.exportModel(id);
  REQUIRE(model.sections.size() == 1);
  CHECK(model.sections[0].name == kPluginBlobSection);
  CHECK(model.sections[0].opaque);

  // a reloaded copy continues the same action sequence
  auto lake = eng.catalog().environment("FrozenLake-v0");
  PluginAgent original(testpaths::agentPlugin("random_agent.py"), lake, {});
  const auto obs = env::Observation::discrete(0);
  for (int i = 0; i < 5; ++i) original.chooseAction(obs, agents::Mode::Train);
  auto saved = original.serialize();
  PluginAgent copy(testpaths::agentPlugin("random_agent.py"), lake, {});
  copy.deserialize(saved);
  for (int i = 0; i < 50; ++i) {
    CHECK(copy.chooseAction(obs, agents::Mode::Test) == original.chooseAction(obs, agents::Mode::Test));
  }
}

TEST_CASE("host never pipelines requests") {
  const auto log = std::filesystem::temp_directory_path() / ("easyrl_shim_" + std::to_string(::getpid()) + ".log");
  auto shim = [&](const std::string& script, PluginKind kind) {
    std::vector<std::string> cmd = {EASYRL_PYTHON, testpaths::fixture("alternation_shim.py"), "--log",
                                    log.string(), "--"};
    for (const auto& part : testpaths::pythonCommand(script)) cmd.push_back(part);
    return PluginSpec{kind, cmd, kDefaultTimeout};
  };
  engine::Engine eng({1});
  const auto envId = eng.catalog().registerPlugin(shim("cartpole_env.py", PluginKind::Environment));
  engine::SessionConfig c;
  c.envId = envId;
  c.agentId = "dqn";
  c.hyperparameters.episodes = 3;
  c.hyperparameters.hiddenLayers = {8};
  c.displaySpeed = 60;
  auto id = eng.createSession(c).sessionId;
  CHECK((eng.run(id).status == engine::SessionStatus::Finished));
  {
    std::ifstream in(log);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("ok ", 0) == 0);
  }

  auto report = checkConformance(shim("random_agent.py", PluginKind::Agent));
  CHECK(report.passed());
  std::ifstream in(log);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("ok ", 0) == 0);
  std::filesystem::remove(log);
}

TEST_CASE("conformance check") {
  auto good = checkConformance(testpaths::envPlugin("echo_env.py"));
  CHECK(good.passed());
  CHECK(good.checks.size() >= 4);
  CHECK(contains(good.format(), "PASS hello"));
  CHECK(checkConformance(testpaths::envPlugin("cartpole_env.py")).passed());
  CHECK(checkConformance(testpaths::agentPlugin("random_agent.py")).passed());

  for (const std::string fault : {"bad_dim", "bad_action", "timeout", "garbage", "version", "early_exit"}) {
    CAPTURE(fault);
    auto r = checkConformance(faulty(fault, 500ms));
    CHECK_FALSE(r.passed());
    CHECK(contains(r.format(), "FAIL"));
  }
}

}
