#pragma once

// A 2-agent Markov decision process: deterministic transitions on composed
// actions, with all stochasticity in the two agents. A single agent in a
// noisy environment is the special case of a neutral second agent.

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "prefplan/distributions.hpp"
#include "prefplan/random.hpp"

namespace prefplan::mdp {

/// Thrown when a transition is undefined for a state and composed action.
class TransitionError : public std::runtime_error {
 public:
  TransitionError(const std::string& state, const std::string& action, std::optional<std::size_t> step = {})
      : std::runtime_error("transition undefined" +
                           (step ? " at step " + std::to_string(*step) : std::string()) + " from state " +
                           state + " under action " + action),
        step_(step) {}
  std::optional<std::size_t> step() const noexcept { return step_; }

 private:
  std::optional<std::size_t> step_;
};

/// Whether the second agent observes the first agent's action.
enum class Turn { simultaneous, sequential };

template <class State, class Action1, class Action2, class Action>
struct TwoAgentMdp {
  using state_type = State;
  using action1_type = Action1;
  using action2_type = Action2;
  using action_type = Action;

  State initial;
  /// Action sets, when enumerable; left empty for agents whose actions depend
  /// on the state.
  std::vector<Action1> actions_1;
  std::vector<Action2> actions_2;
  std::function<Action(const Action1&, const Action2&)> compose;
  /// Returns nullopt where the transition is undefined.
  std::function<std::optional<State>(const State&, const Action&)> transition;
  /// The terminal state; absorbing.
  std::function<bool(const State&)> is_terminal;
  std::function<std::string(const State&)> encode_state = [](const State&) { return std::string("?"); };
  std::function<std::string(const Action&)> encode_action = [](const Action&) { return std::string("?"); };

  /// Applies the transition or throws TransitionError.
  State step(const State& s, const Action& a, std::optional<std::size_t> index = {}) const {
    if (is_terminal(s)) throw TransitionError(encode_state(s) + " (terminal)", encode_action(a), index);
    std::optional<State> next = transition(s, a);
    if (!next) throw TransitionError(encode_state(s), encode_action(a), index);
    return std::move(*next);
  }
};

template <class State, class Action>
struct EpisodeTrajectory {
  State s0;
  std::vector<Action> actions;
};

template <class State, class Action>
struct UnrollResult {
  EpisodeTrajectory<State, Action> trajectory;
  /// s0 followed by the state after each action.
  std::vector<State> states;
  /// True when max_steps ran out before the terminal state.
  bool truncated = false;
};

/// Samples an episode. `agent_1(state, rng)` draws the first agent's action;
/// `agent_2(state, a1, rng)` draws the second's, where `a1` is set only in
/// the sequential setting. Stops at the terminal state or after
/// `max_steps` actions, flagging truncation.
template <class Mdp, class Agent1, class Agent2>
UnrollResult<typename Mdp::state_type, typename Mdp::action_type> unroll(
    const Mdp& mdp, Agent1&& agent_1, Agent2&& agent_2, std::size_t max_steps, Rng& rng,
    Turn turn = Turn::simultaneous, std::optional<typename Mdp::state_type> start = {}) {
  using State = typename Mdp::state_type;
  using A1 = typename Mdp::action1_type;
  if (max_steps < 1) throw std::invalid_argument("unroll: max_steps must be at least 1");
  UnrollResult<State, typename Mdp::action_type> out;
  out.trajectory.s0 = start ? *start : mdp.initial;
  out.states.push_back(out.trajectory.s0);
  State s = out.trajectory.s0;
  while (!mdp.is_terminal(s)) {
    if (out.trajectory.actions.size() == max_steps) {
      out.truncated = true;
      break;
    }
    A1 a1 = agent_1(static_cast<const State&>(s), rng);
    auto a2 = turn == Turn::sequential ? agent_2(static_cast<const State&>(s), std::optional<A1>(a1), rng)
                                       : agent_2(static_cast<const State&>(s), std::optional<A1>(), rng);
    auto a = mdp.compose(a1, a2);
    s = mdp.step(s, a, out.trajectory.actions.size());
    out.trajectory.actions.push_back(std::move(a));
    out.states.push_back(s);
  }
  return out;
}

template <class Mdp, class Agent1, class Agent2>
UnrollResult<typename Mdp::state_type, typename Mdp::action_type> unroll(const Mdp& mdp, Agent1&& agent_1,
                                                                         Agent2&& agent_2, std::size_t max_steps,
                                                                         Seed seed, Turn turn = Turn::simultaneous) {
  Rng rng(seed);
  return unroll(mdp, std::forward<Agent1>(agent_1), std::forward<Agent2>(agent_2), max_steps, rng, turn);
}

/// Reconstructs the visited states of a trajectory. Throws TransitionError
/// carrying the index of the first action that cannot be applied.
template <class Mdp>
std::vector<typename Mdp::state_type> replay(
    const Mdp& mdp, const EpisodeTrajectory<typename Mdp::state_type, typename Mdp::action_type>& trajectory) {
  std::vector<typename Mdp::state_type> states{trajectory.s0};
  for (std::size_t i = 0; i < trajectory.actions.size(); ++i)
    states.push_back(mdp.step(states.back(), trajectory.actions[i], i));
  return states;
}

/// CSV with columns step, action, state. Row 0 holds s0 and an empty action.
template <class Mdp>
void write_trajectory_csv(std::ostream& out, const Mdp& mdp,
                          const EpisodeTrajectory<typename Mdp::state_type, typename Mdp::action_type>& trajectory) {
  const auto states = replay(mdp, trajectory);
  out << "step,action,state\n";
  out << "0,," << mdp.encode_state(states[0]) << '\n';
  for (std::size_t i = 0; i < trajectory.actions.size(); ++i)
    out << i + 1 << ',' << mdp.encode_action(trajectory.actions[i]) << ',' << mdp.encode_state(states[i + 1])
        << '\n';
}

/// The reasoning model of one agent. `belief_about_other` receives the
/// agent's own action in the sequential setting and nullopt otherwise. The
/// desired-state distribution acts as a log-weight on the realized
/// successor, since successors are deterministic given the composed action.
template <class State, class OwnAction, class OtherAction>
class AgentModel {
 public:
  virtual ~AgentModel() = default;
  virtual FiniteDistribution<OwnAction> prior_actions(const State& s) const = 0;
  virtual FiniteDistribution<OtherAction> belief_about_other(const State& s,
                                                             const std::optional<OwnAction>& own) const = 0;
  virtual double desired_successor_log_weight(const State& s, const State& next) const = 0;
};

/// Unnormalized log-posterior of each own action in state `s` for an agent
/// acting as the first agent: the log prior of the action plus the
/// stochastically conditioned log-weight of the successor, with the other
/// agent's action distributed as believed. One level only; agents whose
/// beliefs come from deeper reasoning supply them through
/// `belief_about_other`.
template <class Mdp, class Model>
std::vector<double> one_step_action_log_weights(const Mdp& mdp, const Model& model,
                                                const typename Mdp::state_type& s, Turn turn) {
  using A1 = typename Mdp::action1_type;
  const auto prior = model.prior_actions(s);
  std::vector<double> out;
  out.reserve(prior.size());
  for (std::size_t i = 0; i < prior.size(); ++i) {
    const A1& own = prior.outcome(i);
    const auto belief = model.belief_about_other(s, turn == Turn::sequential ? std::optional<A1>(own)
                                                                           : std::optional<A1>());
    const double lw = stochastic_log_weight(
        [&](const typename Mdp::action2_type& other) {
          return model.desired_successor_log_weight(s, mdp.step(s, mdp.compose(own, other)));
        },
        belief);
    out.push_back(std::log(prior.weight(i)) + lw);
  }
  return out;
}

/// Preference learning from observed trajectories: a prior over the
/// preference parameters and the likelihood of the observed trajectories.
template <class Params, class State, class Action>
class ApprenticeModel {
 public:
  virtual ~ApprenticeModel() = default;
  virtual double log_prior(const Params& params) const = 0;
  virtual double log_likelihood(const Params& params,
                                const std::vector<EpisodeTrajectory<State, Action>>& observed) const = 0;
};

}  // namespace prefplan::mdp
