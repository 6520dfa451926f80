#pragma once

// Two agents, each choosing one of two bars, with probabilistic preferences
// for a bar and for meeting (or avoiding) the other agent. Each agent
// conditions its choice stochastically on its belief about the other's
// choice distribution; beliefs are formed by bounded mutual recursion.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "prefplan/mcmc.hpp"
#include "prefplan/random.hpp"

namespace prefplan::fable {

enum class Bar : int { first = 1, second = 2 };

inline Bar bar_of(bool chose_first) { return chose_first ? Bar::first : Bar::second; }

/// An agent's preferences. `p1` is the prior probability of choosing the
/// first bar; `pm` is the probability of choosing the other agent's bar if
/// that bar were known and the agent were otherwise indifferent.
struct AgentPreferences {
  std::string name;
  double p1;
  double pm;

  /// Throws std::invalid_argument unless both probabilities lie in (0, 1).
  AgentPreferences(std::string name, double p1, double pm);

  friend bool operator==(const AgentPreferences&, const AgentPreferences&) = default;
};

enum class ChoiceMethod { analytical, monte_carlo };

const char* to_string(ChoiceMethod m);

struct ChoicePosterior {
  double p_first = 0.0;
  int depth = 0;
  ChoiceMethod method = ChoiceMethod::analytical;
  std::size_t n_iters = 0;  // monte-carlo only
  double std_error = 0.0;   // monte-carlo only
};

struct EpisodeOutcome {
  Bar choice_a;
  Bar choice_b;
  bool met;
};

/// Log-probability that the agent's choice lands on the other agent's bar
/// under its meeting preference, stochastically conditioned on the other
/// agent choosing the first bar with probability `q`:
///
///   chose_first:  q log pm + (1 - q) log(1 - pm)
///   otherwise:    q log(1 - pm) + (1 - q) log pm
double meeting_log_likelihood(const AgentPreferences& prefs, double q, bool chose_first);

/// One step of deliberation: the posterior probability of the first bar
/// given belief `q` about the other agent.
double posterior_first(const AgentPreferences& prefs, double q);

/// Exact choice distribution at the given deliberation depth. Depth 0 is the
/// prior p1; depth d conditions on the other agent's depth d-1 choice.
ChoicePosterior analytical_choice(const AgentPreferences& me, const AgentPreferences& other, int depth);

/// Choice probabilities of both agents at depths 0..max_depth. The
/// recursion is tabulated bottom-up, so the whole sweep costs O(max_depth).
struct DepthSweep {
  std::vector<double> me;
  std::vector<double> other;
};
DepthSweep analytical_sweep(const AgentPreferences& me, const AgentPreferences& other, int max_depth);

/// Choice probability of a softmax agent with rewards equal to the
/// preference log-odds: r1 - r2 = logit(p1), rm = logit(pm).
double softmax_choice(const AgentPreferences& me, double q);

/// Monte-Carlo estimates by Metropolis-Hastings over the binary choice.
///
/// At depth 0 the belief about the other agent is q = 0.5, so the chain
/// samples the prior; at depth d, q is the estimate for the other agent at
/// depth d-1. Results are memoized per (me, other, depth) for the lifetime of
/// the chooser, and every chain seed is derived from the chooser seed and its
/// key, so the same estimate is returned whichever top-level query reaches it.
class McChooser {
 public:
  McChooser(std::size_t n_iters, Seed seed, double burn_in_fraction = 0.1);

  ChoicePosterior choose(const AgentPreferences& me, const AgentPreferences& other, int depth);

  std::size_t n_iters() const noexcept { return n_iters_; }
  Seed seed() const noexcept { return seed_; }

 private:
  using Key = std::tuple<std::string, double, double, std::string, double, double, int>;
  std::size_t n_iters_;
  Seed seed_;
  double burn_in_fraction_;
  std::map<Key, ChoicePosterior> memo_;
};

/// Convenience wrapper around a fresh McChooser. Requires n_iters >= 100.
ChoicePosterior mc_choice(const AgentPreferences& me, const AgentPreferences& other, int depth,
                          std::size_t n_iters, Seed seed);

/// One episode: both agents choose independently from their analytical
/// posteriors at the given depth.
EpisodeOutcome simulate_episode(const AgentPreferences& a, const AgentPreferences& b, int depth, Seed seed);

/// Log-odds prior (normal) for preference learning.
struct LogOddsPrior {
  double location = 0.0;
  double scale = 2.5;
  double log_density(double x) const;
};

struct PreferenceBelief {
  std::vector<double> log_odds_samples;
  LogOddsPrior prior;
  double acceptance_rate = 0.0;
};

struct LearningOptions {
  /// Depth at which the other agent's choice model is evaluated.
  int depth = 6;
  LogOddsPrior prior{};
  /// Bar preference of the other agent; defaults to the learner's own p1.
  std::optional<double> other_p1;
  std::size_t n_iters = 5000;
  double burn_in_fraction = 0.1;
  double proposal_scale = 1.5;
  /// Number of (thinned) posterior samples returned.
  std::size_t n_samples = 100;
  Seed seed = 0;
};

/// Log-likelihood of the other agent's observed bars when its meeting
/// log-odds are `log_odds`: each observation is scored by the other agent's
/// analytical choice probability at `depth`, with `me` as its counterpart.
double observed_choices_log_likelihood(const AgentPreferences& me, double other_p1, double log_odds,
                                       const std::vector<Bar>& observed, int depth);

/// Posterior over the other agent's meeting log-odds given its observed
/// choices. Throws std::invalid_argument on an empty observation list.
PreferenceBelief infer_meeting_preference(const AgentPreferences& me, const std::vector<Bar>& observed,
                                          const LearningOptions& options);

/// The six preference configurations studied for the fable.
struct Preset {
  std::string name;
  AgentPreferences alice;
  AgentPreferences bob;
};
const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

}  // namespace prefplan::fable
