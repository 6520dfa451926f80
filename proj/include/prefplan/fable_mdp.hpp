#pragma once

// The fable as a one-step 2-agent MDP: from the start state both agents pick
// a bar and the episode ends. Encodings used in trajectory CSVs: the start
// state is "start", the terminal state "end:<bar a>-<bar b>", a joint action
// "<bar a>-<bar b>".

#include <optional>
#include <string>
#include <vector>

#include "prefplan/fable.hpp"
#include "prefplan/mdp.hpp"

namespace prefplan::fable {

struct FableState {
  bool terminal = false;
  Bar bar_a = Bar::first;
  Bar bar_b = Bar::first;
  friend bool operator==(const FableState&, const FableState&) = default;
};

struct JointChoice {
  Bar bar_a;
  Bar bar_b;
  friend bool operator==(const JointChoice&, const JointChoice&) = default;
};

using FableMdp = mdp::TwoAgentMdp<FableState, Bar, Bar, JointChoice>;
using FableTrajectory = mdp::EpisodeTrajectory<FableState, JointChoice>;

FableMdp fable_mdp();

/// Agent whose belief about the other is Bernoulli(q) on the first bar and
/// whose desired successor is the one where both agents share a bar, with
/// probability pm.
class FableAgentModel : public mdp::AgentModel<FableState, Bar, Bar> {
 public:
  FableAgentModel(AgentPreferences prefs, double q) : prefs_(std::move(prefs)), q_(q) {}
  FiniteDistribution<Bar> prior_actions(const FableState&) const override;
  FiniteDistribution<Bar> belief_about_other(const FableState&, const std::optional<Bar>&) const override;
  double desired_successor_log_weight(const FableState&, const FableState& next) const override;

 private:
  AgentPreferences prefs_;
  double q_;
};

/// Learns the second agent's meeting log-odds from trajectories of the
/// fable MDP, scoring its observed bar by its analytical choice at `depth`
/// with the learner as counterpart.
class MeetingPreferenceApprentice : public mdp::ApprenticeModel<double, FableState, JointChoice> {
 public:
  MeetingPreferenceApprentice(AgentPreferences learner, double other_p1, int depth, LogOddsPrior prior)
      : learner_(std::move(learner)), other_p1_(other_p1), depth_(depth), prior_(prior) {}
  double log_prior(const double& log_odds) const override { return prior_.log_density(log_odds); }
  double log_likelihood(const double& log_odds, const std::vector<FableTrajectory>& observed) const override;

 private:
  AgentPreferences learner_;
  double other_p1_;
  int depth_;
  LogOddsPrior prior_;
};

}  // namespace prefplan::fable
