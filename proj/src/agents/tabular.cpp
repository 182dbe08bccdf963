#include "easyrl/agents/tabular.hpp"

#include <algorithm>

#include "easyrl/agents/exploration.hpp"
#include "easyrl/common/error.hpp"

namespace easyrl::agents {
namespace {

void checkIndices(const QTable& table, const Transition& t) {
  if (t.observation.index() >= table.stateCount() ||
      t.nextObservation.index() >= table.stateCount() || t.action >= table.actionCount()) {
    fail(ErrorCode::Argument, "transition indices outside the Q-table");
  }
}

double applyTarget(QTable& table, const Transition& t, double target, double alpha) {
  double& q = table(t.observation.index(), t.action);
  q += alpha * (target - q);
  return q;
}

}  // namespace

double qLearningUpdate(QTable& table, const Transition& t, double alpha, double gamma) {
  checkIndices(table, t);
  const auto next = table.row(t.nextObservation.index());
  const double best = *std::max_element(next.begin(), next.end());
  const double target = t.reward + (t.done ? 0.0 : gamma * best);
  return applyTarget(table, t, target, alpha);
}

double sarsaUpdate(QTable& table, const Transition& t, std::size_t nextAction,
                   double alpha, double gamma) {
  checkIndices(table, t);
  if (nextAction >= table.actionCount()) fail(ErrorCode::Argument, "next action out of range");
  const double target =
      t.reward + (t.done ? 0.0 : gamma * table(t.nextObservation.index(), nextAction));
  return applyTarget(table, t, target, alpha);
}

TabularAgent::TabularAgent(Rule rule, const EnvDescriptor& env, const Hyperparameters& hp)
    : id_(rule == Rule::QLearning ? "qlearning" : "sarsa"),
      rule_(rule),
      hp_(hp),
      table_(env.obsKind.size, env.actionCount),
      rng_(hp.seed + 2) {
  if (!env.obsKind.isDiscrete()) {
    fail(ErrorCode::Incompatible, id_ + " needs a discrete observation space, " + env.id +
                                      " is " + env::toString(env.obsKind));
  }
}

void TabularAgent::beginEpisode() { plannedAction_.reset(); }

std::size_t TabularAgent::chooseAction(const Observation& observation, Mode mode) {
  const std::size_t s = observation.index();
  if (s >= table_.stateCount()) fail(ErrorCode::Argument, "state index out of range");
  if (mode == Mode::Test) return argmax(table_.row(s));
  if (plannedAction_ && plannedAction_->first == s) {
    const std::size_t a = plannedAction_->second;
    plannedAction_.reset();
    return a;
  }
  return epsilonGreedy(table_.row(s), annealEpsilon(hp_, globalStep_), rng_);
}

void TabularAgent::observe(const Transition& t) {
  ++globalStep_;
  const double before = table_(t.observation.index(), t.action);
  double after = 0.0;
  if (rule_ == Rule::QLearning) {
    after = qLearningUpdate(table_, t, hp_.learningRate, hp_.gamma);
  } else {
    std::size_t next = 0;
    if (!t.done) {
      next = epsilonGreedy(table_.row(t.nextObservation.index()),
                           annealEpsilon(hp_, globalStep_), rng_);
      plannedAction_ = std::make_pair(t.nextObservation.index(), next);
    }
    after = sarsaUpdate(table_, t, next, hp_.learningRate, hp_.gamma);
  }
  // after - before = alpha * delta
  const double delta = hp_.learningRate > 0.0 ? (after - before) / hp_.learningRate : 0.0;
  pendingError_ = delta * delta;
}

std::optional<double> TabularAgent::update() {
  auto out = pendingError_;
  pendingError_.reset();
  return out;
}

std::optional<double> TabularAgent::epsilon() const { return annealEpsilon(hp_, globalStep_); }

std::vector<WeightSection> TabularAgent::serialize() const {
  return {WeightSection{"q_table", table_.values.shape(), table_.values.values(), false, {}}};
}

void TabularAgent::deserialize(const std::vector<WeightSection>& sections) {
  restoreTensor(findSection(sections, "q_table"), table_.values);
}

}  // namespace easyrl::agents
