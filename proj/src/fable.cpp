#include "prefplan/fable.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "prefplan/distributions.hpp"

namespace prefplan::fable {

namespace {

// FNV-1a; stable across platforms, unlike std::hash.
std::uint64_t hash_name(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void require_probability(double q, const char* what) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument(std::string(what) + ": q outside [0, 1]");
}

}  // namespace

AgentPreferences::AgentPreferences(std::string name_, double p1_, double pm_)
    : name(std::move(name_)), p1(p1_), pm(pm_) {
  if (!(p1 > 0.0 && p1 < 1.0)) throw std::invalid_argument("AgentPreferences: p1 must lie in (0, 1)");
  if (!(pm > 0.0 && pm < 1.0)) throw std::invalid_argument("AgentPreferences: pm must lie in (0, 1)");
}

const char* to_string(ChoiceMethod m) {
  return m == ChoiceMethod::analytical ? "analytical" : "monte-carlo";
}

double meeting_log_likelihood(const AgentPreferences& prefs, double q, bool chose_first) {
  require_probability(q, "meeting_log_likelihood");
  if (chose_first) return q * std::log(prefs.pm) + (1.0 - q) * std::log(1.0 - prefs.pm);
  return q * std::log(1.0 - prefs.pm) + (1.0 - q) * std::log(prefs.pm);
}

double posterior_first(const AgentPreferences& prefs, double q) {
  // p1 e^{L1} / (p1 e^{L1} + (1-p1) e^{L2}), divided through by e^{L1}.
  // With pm = 0.5 the exponent is exactly zero and p1 is returned unchanged.
  const double l1 = meeting_log_likelihood(prefs, q, true);
  const double l2 = meeting_log_likelihood(prefs, q, false);
  return prefs.p1 / (prefs.p1 + (1.0 - prefs.p1) * std::exp(l2 - l1));
}

DepthSweep analytical_sweep(const AgentPreferences& me, const AgentPreferences& other, int max_depth) {
  if (max_depth < 0) throw std::invalid_argument("analytical_sweep: negative depth");
  DepthSweep s;
  s.me.reserve(max_depth + 1);
  s.other.reserve(max_depth + 1);
  s.me.push_back(me.p1);
  s.other.push_back(other.p1);
  for (int d = 1; d <= max_depth; ++d) {
    s.me.push_back(posterior_first(me, s.other[d - 1]));
    s.other.push_back(posterior_first(other, s.me[d - 1]));
  }
  return s;
}

ChoicePosterior analytical_choice(const AgentPreferences& me, const AgentPreferences& other, int depth) {
  if (depth < 0) throw std::invalid_argument("analytical_choice: negative depth");
  // Each level only needs the other agent's value one level down.
  double mine = me.p1;
  double theirs = other.p1;
  for (int d = 1; d <= depth; ++d) {
    const double next_mine = posterior_first(me, theirs);
    const double next_theirs = posterior_first(other, mine);
    mine = next_mine;
    theirs = next_theirs;
  }
  return {mine, depth, ChoiceMethod::analytical, 0, 0.0};
}

double softmax_choice(const AgentPreferences& me, double q) {
  require_probability(q, "softmax_choice");
  const double r_bar = std::log(me.p1 / (1.0 - me.p1));  // r1 - r2
  const double r_meet = std::log(me.pm / (1.0 - me.pm));
  const double u1 = r_bar + q * r_meet;
  const double u2 = (1.0 - q) * r_meet;
  return std::exp(u1) / (std::exp(u1) + std::exp(u2));
}

McChooser::McChooser(std::size_t n_iters, Seed seed, double burn_in_fraction)
    : n_iters_(n_iters), seed_(seed), burn_in_fraction_(burn_in_fraction) {
  if (n_iters_ < 100) throw std::invalid_argument("McChooser: n_iters must be at least 100");
}

ChoicePosterior McChooser::choose(const AgentPreferences& me, const AgentPreferences& other, int depth) {
  if (depth < 0) throw std::invalid_argument("mc_choice: negative depth");
  const Key key{me.name, me.p1, me.pm, other.name, other.p1, other.pm, depth};
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  const double q = depth > 0 ? choose(other, me, depth - 1).p_first : 0.5;
  const Seed chain_seed =
      derive_seed(seed_, {hash_name(me.name), bits_of(me.p1), bits_of(me.pm), hash_name(other.name),
                          bits_of(other.p1), bits_of(other.pm), static_cast<std::uint64_t>(depth)});
  const double log_prior_first = std::log(me.p1);
  const double log_prior_second = std::log(1.0 - me.p1);
  auto target = [&](bool first) {
    return (first ? log_prior_first : log_prior_second) + meeting_log_likelihood(me, q, first);
  };
  Rng init_rng(derive_seed(chain_seed, {0}));
  const bool init = init_rng.bernoulli(me.p1);
  const PosteriorSamples chain =
      mh_chain(target, FlipProposal{}, init, ChainConfig{n_iters_, burn_in_fraction_, chain_seed});

  const double p = chain.mean();
  const double n = static_cast<double>(chain.values.size());
  ChoicePosterior result{p, depth, ChoiceMethod::monte_carlo, n_iters_, std::sqrt(p * (1.0 - p) / n)};
  memo_.emplace(key, result);
  return result;
}

ChoicePosterior mc_choice(const AgentPreferences& me, const AgentPreferences& other, int depth,
                          std::size_t n_iters, Seed seed) {
  McChooser chooser(n_iters, seed);
  return chooser.choose(me, other, depth);
}

EpisodeOutcome simulate_episode(const AgentPreferences& a, const AgentPreferences& b, int depth, Seed seed) {
  const double pa = analytical_choice(a, b, depth).p_first;
  const double pb = analytical_choice(b, a, depth).p_first;
  Rng rng(seed);
  const Bar ca = bar_of(rng.bernoulli(pa));
  const Bar cb = bar_of(rng.bernoulli(pb));
  return {ca, cb, ca == cb};
}

double LogOddsPrior::log_density(double x) const {
  const double z = (x - location) / scale;
  return -0.5 * z * z - std::log(scale) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double observed_choices_log_likelihood(const AgentPreferences& me, double other_p1, double log_odds,
                                       const std::vector<Bar>& observed, int depth) {
  const AgentPreferences other("other", other_p1, logistic(log_odds));
  const double p = analytical_choice(other, me, depth).p_first;
  double total = 0.0;
  for (Bar b : observed) total += std::log(b == Bar::first ? p : 1.0 - p);
  return total;
}

PreferenceBelief infer_meeting_preference(const AgentPreferences& me, const std::vector<Bar>& observed,
                                          const LearningOptions& options) {
  if (observed.empty()) throw std::invalid_argument("infer_meeting_preference: no observations");
  if (!(options.prior.scale > 0.0)) throw std::invalid_argument("infer_meeting_preference: prior scale must be positive");
  const double other_p1 = options.other_p1.value_or(me.p1);
  auto target = [&](double log_odds) {
    // logistic() saturates to exactly 0 or 1 far out in the tails; those
    // points carry no prior mass worth sampling.
    const double pm = logistic(log_odds);
    if (!(pm > 0.0 && pm < 1.0)) return kNegInf;
    return options.prior.log_density(log_odds) +
           observed_choices_log_likelihood(me, other_p1, log_odds, observed, options.depth);
  };
  const PosteriorSamples chain =
      mh_chain(target, GaussianWalk{options.proposal_scale}, options.prior.location,
               ChainConfig{options.n_iters, options.burn_in_fraction, options.seed});
  PreferenceBelief belief;
  belief.log_odds_samples = chain.thinned(options.n_samples).values;
  belief.prior = options.prior;
  belief.acceptance_rate = chain.acceptance_rate;
  return belief;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = {
      {"meet-symmetric", {"Alice", 0.55, 0.9}, {"Bob", 0.55, 0.9}},
      {"meet-different-bars", {"Alice", 0.75, 0.75}, {"Bob", 0.45, 0.75}},
      {"chase-mild", {"Alice", 0.55, 0.25}, {"Bob", 0.55, 0.75}},
      {"chase-strong", {"Alice", 0.55, 0.1}, {"Bob", 0.55, 0.9}},
      {"avoid-mild", {"Alice", 0.55, 0.25}, {"Bob", 0.55, 0.25}},
      {"avoid-strong", {"Alice", 0.55, 0.05}, {"Bob", 0.55, 0.05}},
  };
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

}  // namespace prefplan::fable
