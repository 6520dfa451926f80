#include "prefplan/fable_mdp.hpp"

#include <cmath>

namespace prefplan::fable {

namespace {
char digit(Bar b) { return b == Bar::first ? '1' : '2'; }
}  // namespace

FableMdp fable_mdp() {
  FableMdp m;
  m.initial = FableState{};
  m.actions_1 = {Bar::first, Bar::second};
  m.actions_2 = {Bar::first, Bar::second};
  m.compose = [](const Bar& a, const Bar& b) { return JointChoice{a, b}; };
  m.transition = [](const FableState& s, const JointChoice& a) -> std::optional<FableState> {
    if (s.terminal) return std::nullopt;
    return FableState{true, a.bar_a, a.bar_b};
  };
  m.is_terminal = [](const FableState& s) { return s.terminal; };
  m.encode_state = [](const FableState& s) {
    return s.terminal ? std::string("end:") + digit(s.bar_a) + '-' + digit(s.bar_b) : std::string("start");
  };
  m.encode_action = [](const JointChoice& a) { return std::string{digit(a.bar_a), '-', digit(a.bar_b)}; };
  return m;
}

FiniteDistribution<Bar> FableAgentModel::prior_actions(const FableState&) const {
  return FiniteDistribution<Bar>({Bar::first, Bar::second}, {prefs_.p1, 1.0 - prefs_.p1});
}

FiniteDistribution<Bar> FableAgentModel::belief_about_other(const FableState&, const std::optional<Bar>&) const {
  return FiniteDistribution<Bar>({Bar::first, Bar::second}, {q_, 1.0 - q_});
}

double FableAgentModel::desired_successor_log_weight(const FableState&, const FableState& next) const {
  return next.bar_a == next.bar_b ? std::log(prefs_.pm) : std::log(1.0 - prefs_.pm);
}

double MeetingPreferenceApprentice::log_likelihood(const double& log_odds,
                                                   const std::vector<FableTrajectory>& observed) const {
  std::vector<Bar> bars;
  for (const auto& t : observed)
    for (const auto& a : t.actions) bars.push_back(a.bar_b);
  return observed_choices_log_likelihood(learner_, other_p1_, log_odds, bars, depth_);
}

}  // namespace prefplan::fable
