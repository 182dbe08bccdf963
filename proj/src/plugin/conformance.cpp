#include "easyrl/plugin/conformance.hpp"

#include <functional>
#include <sstream>

#include "easyrl/env/builtin.hpp"

namespace easyrl::plugin {
namespace {

class Matrix {
 public:
  explicit Matrix(ConformanceReport& report) : report_(report) {}

  // Runs fn unless an earlier check lost the plugin.
  void check(const std::string& message, const std::function<std::string()>& fn) {
    CheckResult r{message, false, {}};
    if (broken_) {
      r.detail = "not run: plugin lost earlier";
    } else {
      try {
        r.detail = fn();
        r.pass = true;
      } catch (const Error& e) {
        r.detail = std::string(toString(e.code())) + ": " + e.what();
        broken_ = e.isPluginError();
      } catch (const std::exception& e) {
        r.detail = e.what();
        broken_ = true;
      }
    }
    report_.checks.push_back(std::move(r));
  }

 private:
  ConformanceReport& report_;
  bool broken_ = false;
};

env::StepResult stepOrReset(env::Environment& env, std::size_t action) {
  if (env.done()) env.reset();
  return env.step(action);
}

void checkEnvironment(const PluginSpec& spec, ConformanceReport& report) {
  Matrix m(report);
  std::unique_ptr<PluginEnvironment> env;
  m.check("hello", [&] {
    env = std::make_unique<PluginEnvironment>(spec);
    return "descriptor " + env->descriptor().id;
  });
  m.check("reset", [&] {
    env->reset(0);
    return std::string("seeded reset conforms");
  });
  m.check("step", [&] {
    for (std::size_t a = 0; a < env->descriptor().actionCount; ++a) stepOrReset(*env, a);
    return "all " + std::to_string(env->descriptor().actionCount) + " actions accepted";
  });
  m.check("render", [&] {
    env->render();
    return std::string("frame returned");
  });
  m.check("reset(null)", [&] {
    env->reset();
    return std::string("unseeded reset conforms");
  });
  m.check("episode", [&] {
    const std::size_t limit = env->descriptor().maxEpisodeSteps;
    std::size_t steps = 0;
    env->reset(1);
    while (!env->done() && steps < limit) {
      env->step(steps % env->descriptor().actionCount);
      ++steps;
    }
    return std::to_string(steps) + " steps";
  });
  m.check("determinism", [&] {
    auto run = [&] {
      std::vector<env::StepResult> out{env->reset(7)};
      for (std::size_t i = 0; i < 20 && !env->done(); ++i) {
        out.push_back(env->step(i % env->descriptor().actionCount));
      }
      return out;
    };
    const auto a = run();
    const auto b = run();
    bool same = a.size() == b.size();
    for (std::size_t i = 0; same && i < a.size(); ++i) {
      same = a[i].observation == b[i].observation && a[i].reward == b[i].reward &&
             a[i].done == b[i].done;
    }
    if (!same) fail(ErrorCode::PluginContract, "same seed and actions gave different trajectories");
    return std::string("seeded trajectories repeat");
  });
}

void checkAgent(const PluginSpec& spec, ConformanceReport& report) {
  Matrix m(report);
  std::unique_ptr<PluginAgent> agent;
  env::EnvDescriptor env;
  env::Observation obs;
  std::vector<agents::WeightSection> saved;
  m.check("hello", [&] {
    // probe handshake for supported kinds, then pick a matching built-in env
    PluginHandle probe(spec);
    const auto d = agentDescriptorFromPlugin(probe.descriptor());
    const bool discrete = d.supports(env::ObsKind::discrete(16));
    const std::string envId = discrete ? "FrozenLake-v0" : "CartPole-v1";
    for (const auto& f : env::builtinEnvironments()) {
      if (f.descriptor.id == envId) env = f.descriptor;
    }
    obs = discrete ? env::Observation::discrete(0)
                   : env::Observation::continuous(std::vector<double>(env.obsKind.size, 0.0));
    agent = std::make_unique<PluginAgent>(spec, env, agents::Hyperparameters{});
    return "descriptor " + d.id + " on " + env.id;
  });
  m.check("chooseAction", [&] {
    agent->chooseAction(obs, agents::Mode::Train);
    agent->chooseAction(obs, agents::Mode::Test);
    return std::string("actions in range");
  });
  m.check("observe", [&] {
    agent->observe({obs, 0, 1.0, obs, false});
    agent->observe({obs, env.actionCount - 1, 0.0, obs, true});
    return std::string("acknowledged");
  });
  m.check("update", [&] {
    auto loss = agent->update();
    return loss ? "loss " + std::to_string(*loss) : std::string("no loss");
  });
  m.check("save", [&] {
    saved = agent->serialize();
    return std::to_string(saved.front().bytes.size()) + " byte blob";
  });
  m.check("load", [&] {
    agent->deserialize(saved);
    agent->chooseAction(obs, agents::Mode::Test);
    return std::string("blob accepted");
  });
}

}  // namespace

bool ConformanceReport::passed() const {
  if (checks.empty()) return false;
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

std::string ConformanceReport::format() const {
  std::ostringstream out;
  for (const auto& c : checks) {
    out << (c.pass ? "PASS " : "FAIL ") << c.message << "  " << c.detail << '\n';
  }
  return out.str();
}

ConformanceReport checkConformance(const PluginSpec& spec) {
  ConformanceReport report;
  report.kind = spec.kind;
  if (spec.kind == PluginKind::Environment) {
    checkEnvironment(spec, report);
  } else {
    checkAgent(spec, report);
  }
  return report;
}

}  // namespace easyrl::plugin
