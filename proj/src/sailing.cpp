#include "prefplan/sailing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "prefplan/distributions.hpp"

namespace prefplan::sailing {

double Direction::length() const { return diagonal() ? std::numbers::sqrt2 : 1.0; }

const char* direction_name(Direction d) {
  static constexpr const char* names[kDirections] = {"N", "NE", "E", "SE", "S", "SW", "W", "NW"};
  return names[d.index];
}

const char* to_string(PointOfSail p) {
  switch (p) {
    case PointOfSail::away: return "away";
    case PointOfSail::down: return "down";
    case PointOfSail::cross: return "cross";
    case PointOfSail::up: return "up";
    case PointOfSail::into: return "into";
  }
  return "?";
}

const char* to_string(Tack t) {
  switch (t) {
    case Tack::port: return "port";
    case Tack::starboard: return "starboard";
    case Tack::unset: return "unset";
  }
  return "?";
}

int tick_difference(Direction heading, Direction wind) {
  int d = (heading.index - wind.index + kDirections) % kDirections;
  return d > 4 ? d - kDirections : d;
}

RelativeWind relative_point_of_sail(Direction heading, Direction wind) {
  const int d = tick_difference(heading, wind);
  static constexpr PointOfSail by_magnitude[] = {PointOfSail::away, PointOfSail::down, PointOfSail::cross,
                                                 PointOfSail::up, PointOfSail::into};
  const PointOfSail p = by_magnitude[std::abs(d)];
  const int side = (p == PointOfSail::away || p == PointOfSail::into) ? 0 : (d > 0 ? 1 : -1);
  return {p, side};
}

LakeSpec::LakeSpec(int size) : size_(size) {
  if (size < 2) throw std::invalid_argument("LakeSpec: size must be at least 2");
}

double LakeSpec::distance_to_goal(Position p) const {
  return std::hypot(static_cast<double>(size_ - 1 - p.x), static_cast<double>(size_ - 1 - p.y));
}

void WindModel::validate() const {
  if (!(p_same >= 0.0 && p_left >= 0.0 && p_right >= 0.0))
    throw std::invalid_argument("WindModel: negative probability");
  if (std::abs(p_same + p_left + p_right - 1.0) > 1e-12)
    throw std::invalid_argument("WindModel: probabilities do not sum to 1");
}

int WindModel::sample_shift(Rng& rng) const {
  const double u = rng.uniform();
  if (u < p_same) return 0;
  if (u < p_same + p_left) return -1;
  return 1;
}

double CostTable::unit_cost(PointOfSail p) const {
  switch (p) {
    case PointOfSail::away: return away;
    case PointOfSail::down: return down;
    case PointOfSail::cross: return cross;
    case PointOfSail::up: return up;
    case PointOfSail::into: return std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::infinity();
}

PolicyParam::PolicyParam(double theta) : theta_(theta) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("PolicyParam: theta must be positive");
}

Tack tack_after(Direction heading, Direction wind) {
  const RelativeWind rel = relative_point_of_sail(heading, wind);
  if (rel.side == 0) return Tack::unset;
  return rel.side > 0 ? Tack::starboard : Tack::port;
}

namespace {

Position moved(Position p, Direction d) { return {p.x + d.dx(), p.y + d.dy()}; }

// Cost and tack of a leg, assuming it is feasible.
Leg leg_unchecked(const SailingState& s, Direction heading, const CostTable& costs) {
  const RelativeWind rel = relative_point_of_sail(heading, s.wind);
  const Tack next = tack_after(heading, s.wind);
  double cost = costs.unit_cost(rel.point) * heading.length();
  if (s.tack != Tack::unset && next != Tack::unset && next != s.tack) cost += costs.delay;
  return {cost, next};
}

bool feasible(const SailingState& s, Direction heading, const LakeSpec& lake) {
  return tick_difference(heading, s.wind) != 4 && lake.contains(moved(s.position, heading));
}

void require_feasible(const SailingState& s, Direction heading, const LakeSpec& lake) {
  if (tick_difference(heading, s.wind) == 4)
    throw InfeasibleLeg(std::string("leg ") + direction_name(heading) + " points into the wind");
  if (!lake.contains(moved(s.position, heading)))
    throw InfeasibleLeg(std::string("leg ") + direction_name(heading) + " leaves the lake");
}

// Normalizes log-weights in place; -inf stays -inf.
void normalize_log(LegLogProbs& lw) {
  double hi = kNegInf;
  for (double v : lw) hi = std::max(hi, v);
  double total = 0.0;
  for (double v : lw)
    if (v != kNegInf) total += std::exp(v - hi);
  const double log_z = hi + std::log(total);
  for (double& v : lw)
    if (v != kNegInf) v -= log_z;
}

Direction sample_heading(const LegLogProbs& log_probs, Rng& rng) {
  std::array<double, kDirections> w{};
  for (int i = 0; i < kDirections; ++i) w[i] = log_probs[i] == kNegInf ? 0.0 : std::exp(log_probs[i]);
  return Direction(static_cast<int>(rng.categorical(w)));
}

}  // namespace

Leg leg_cost(const SailingState& state, Direction heading, const LakeSpec& lake, const CostTable& costs) {
  require_feasible(state, heading, lake);
  return leg_unchecked(state, heading, costs);
}

std::vector<Direction> HeadingSet::to_vector() const {
  std::vector<Direction> out;
  for_each([&](Direction d) { out.push_back(d); });
  return out;
}

HeadingSet feasible_legs(const SailingState& state, const LakeSpec& lake) {
  HeadingSet out;
  for (int i = 0; i < kDirections; ++i)
    if (feasible(state, Direction(i), lake)) out.insert(Direction(i));
  return out;
}

namespace {

// Distance of each feasible leg beyond the closest one; NaN for infeasible
// legs. Differences below the tie tolerance are snapped to zero so that a
// large theta cannot amplify rounding noise between legs that are equally
// far in exact arithmetic.
constexpr double kTie = 1e-9;

std::array<double, kDirections> excess_distances(const SailingState& state, const LakeSpec& lake) {
  std::array<double, kDirections> out;
  out.fill(std::numeric_limits<double>::quiet_NaN());
  double closest = std::numeric_limits<double>::infinity();
  feasible_legs(state, lake).for_each([&](Direction d) {
    out[d.index] = lake.distance_to_goal(moved(state.position, d));
    closest = std::min(closest, out[d.index]);
  });
  for (double& v : out)
    if (!std::isnan(v)) v = v - closest < kTie ? 0.0 : v - closest;
  return out;
}

}  // namespace

LegLogProbs policy_log_probs(PolicyParam theta, const SailingState& state, const LakeSpec& lake) {
  const auto excess = excess_distances(state, lake);
  LegLogProbs lw;
  lw.fill(kNegInf);
  for (int i = 0; i < kDirections; ++i)
    if (!std::isnan(excess[i])) lw[i] = -theta.theta() * excess[i];
  normalize_log(lw);
  return lw;
}

LegLogProbs leg_posterior_log_probs(PolicyParam theta, const SailingState& state, const LakeSpec& lake,
                                    const CostTable& costs) {
  const auto excess = excess_distances(state, lake);
  LegLogProbs lw;
  lw.fill(kNegInf);
  for (int i = 0; i < kDirections; ++i)
    if (!std::isnan(excess[i])) lw[i] = -theta.theta() * excess[i] - leg_unchecked(state, Direction(i), costs).cost;
  normalize_log(lw);
  return lw;
}

double policy_log_prob(PolicyParam theta, const SailingState& state, Direction heading, const LakeSpec& lake) {
  require_feasible(state, heading, lake);
  return policy_log_probs(theta, state, lake)[heading.index];
}

double leg_posterior_log_prob(PolicyParam theta, const SailingState& state, Direction heading, const LakeSpec& lake,
                              const CostTable& costs) {
  require_feasible(state, heading, lake);
  return leg_posterior_log_probs(theta, state, lake, costs)[heading.index];
}

Direction greedy_policy(const SailingState& state, const LakeSpec& lake, const CostTable& costs) {
  std::optional<Direction> best;
  double best_distance = 0.0;
  double best_cost = 0.0;
  feasible_legs(state, lake).for_each([&](Direction d) {
    const double dist = lake.distance_to_goal(moved(state.position, d));
    const double cost = leg_unchecked(state, d, costs).cost;
    if (!best || dist < best_distance - kTie || (std::abs(dist - best_distance) <= kTie && cost < best_cost)) {
      best = d;
      best_distance = dist;
      best_cost = cost;
    }
  });
  if (!best) throw InfeasibleLeg("greedy_policy: no feasible leg");
  return *best;
}

LegSampler theta_policy(PolicyParam theta, const LakeSpec& lake, const CostTable& costs, PolicyForm form) {
  if (form == PolicyForm::goal_directed)
    return [theta, lake](const SailingState& s, Rng& rng) {
      return sample_heading(policy_log_probs(theta, s, lake), rng);
    };
  return [theta, lake, costs](const SailingState& s, Rng& rng) {
    return sample_heading(leg_posterior_log_probs(theta, s, lake, costs), rng);
  };
}

LegSampler greedy_sampler(const LakeSpec& lake, const CostTable& costs) {
  return [lake, costs](const SailingState& s, Rng&) { return greedy_policy(s, lake, costs); };
}

SailingMdp sailing_mdp(const LakeSpec& lake, const SailingState& initial) {
  SailingMdp m;
  m.initial = initial;
  for (int i = 0; i < kDirections; ++i) m.actions_1.push_back(Direction(i));
  m.actions_2 = {-1, 0, 1};
  m.compose = [](const Direction& h, const int& shift) { return SailingAction{h, shift}; };
  m.transition = [lake](const SailingState& s, const SailingAction& a) -> std::optional<SailingState> {
    if (!feasible(s, a.heading, lake) || a.wind_shift < -1 || a.wind_shift > 1) return std::nullopt;
    return SailingState{moved(s.position, a.heading), s.wind.rotated(a.wind_shift), tack_after(a.heading, s.wind)};
  };
  const Position goal = lake.goal();
  m.is_terminal = [goal](const SailingState& s) { return s.position == goal; };
  m.encode_state = [](const SailingState& s) {
    return std::to_string(s.position.x) + ':' + std::to_string(s.position.y) + ':' + std::to_string(s.wind.index) +
           ':' + to_string(s.tack);
  };
  m.encode_action = [](const SailingAction& a) {
    return std::string(direction_name(a.heading)) + ':' + std::to_string(a.wind_shift);
  };
  return m;
}

double trajectory_cost(const SailingTrajectory& trajectory, const LakeSpec& lake, const CostTable& costs) {
  SailingState s = trajectory.s0;
  double total = 0.0;
  for (const auto& a : trajectory.actions) {
    const Leg leg = leg_cost(s, a.heading, lake, costs);
    total += leg.cost;
    s = SailingState{moved(s.position, a.heading), s.wind.rotated(a.wind_shift), leg.tack};
  }
  return total;
}

RolloutResult rollout(const LegSampler& policy, const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                      std::size_t max_steps, Rng& rng) {
  const SailingState start{lake.start(), Direction(static_cast<int>(rng.uniform_index(kDirections))), Tack::unset};
  const SailingMdp m = sailing_mdp(lake, start);
  auto neutral_wind = [&wind](const SailingState&, const std::optional<Direction>&, Rng& r) {
    return wind.sample_shift(r);
  };
  auto unrolled = mdp::unroll(m, policy, neutral_wind, max_steps, rng);
  RolloutResult out;
  for (std::size_t i = 0; i < unrolled.trajectory.actions.size(); ++i)
    out.total_cost += leg_unchecked(unrolled.states[i], unrolled.trajectory.actions[i].heading, costs).cost;
  out.trajectory = std::move(unrolled.trajectory);
  out.truncated = unrolled.truncated;
  return out;
}

RolloutResult seeded_rollout(const LegSampler& policy, const LakeSpec& lake, const WindModel& wind,
                             const CostTable& costs, std::size_t max_steps, Seed seed) {
  Rng wind_rng(derive_seed(seed, {1}));
  Rng helm_rng(derive_seed(seed, {2}));
  const SailingState start{lake.start(), Direction(static_cast<int>(wind_rng.uniform_index(kDirections))),
                           Tack::unset};
  const SailingMdp m = sailing_mdp(lake, start);
  auto neutral_wind = [&wind, &wind_rng](const SailingState&, const std::optional<Direction>&, Rng&) {
    return wind.sample_shift(wind_rng);
  };
  auto unrolled = mdp::unroll(m, policy, neutral_wind, max_steps, helm_rng);
  RolloutResult out;
  for (std::size_t i = 0; i < unrolled.trajectory.actions.size(); ++i)
    out.total_cost += leg_unchecked(unrolled.states[i], unrolled.trajectory.actions[i].heading, costs).cost;
  out.trajectory = std::move(unrolled.trajectory);
  out.truncated = unrolled.truncated;
  return out;
}

RolloutResult rollout(PolicyParam theta, const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                      std::size_t max_steps, Seed seed, PolicyForm form) {
  Rng rng(seed);
  return rollout(theta_policy(theta, lake, costs, form), lake, wind, costs, max_steps, rng);
}

PolicyEvaluation evaluate_policy(const PolicyFactory& policy, const LakeSpec& lake, const WindModel& wind,
                                 const CostTable& costs, std::size_t n_rollouts, Seed seed, std::size_t max_steps) {
  if (n_rollouts < 100) throw std::invalid_argument("evaluate_policy: n_rollouts must be at least 100");
  wind.validate();
  if (max_steps == 0) max_steps = default_max_steps(lake);
  PolicyEvaluation out;
  out.n_rollouts = n_rollouts;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < n_rollouts; ++i) {
    Rng rng(derive_seed(seed, {i}));
    const LegSampler sampler = policy(rng);
    const RolloutResult r = rollout(sampler, lake, wind, costs, max_steps, rng);
    if (r.truncated) ++out.n_truncated;
    sum += r.total_cost;
    sum_sq += r.total_cost * r.total_cost;
  }
  const double n = static_cast<double>(n_rollouts);
  out.mean_cost = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.mean_cost * out.mean_cost) / (n - 1.0));
  out.std_error = std::sqrt(var / n);
  out.truncation_warning = static_cast<double>(out.n_truncated) > 0.01 * n;
  return out;
}

PolicyEvaluation evaluate_policy(const LegSampler& policy, const LakeSpec& lake, const WindModel& wind,
                                 const CostTable& costs, std::size_t n_rollouts, Seed seed, std::size_t max_steps) {
  return evaluate_policy([&policy](Rng&) { return policy; }, lake, wind, costs, n_rollouts, seed, max_steps);
}

double estimate_log_likelihood(PolicyParam theta, const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                               std::size_t n_inner, double offset, std::size_t max_steps, PolicyForm form, Rng& rng) {
  const LegSampler policy = theta_policy(theta, lake, costs, form);
  double acc = kNegInf;
  for (std::size_t j = 0; j < n_inner; ++j) {
    const RolloutResult r = rollout(policy, lake, wind, costs, max_steps, rng);
    if (r.truncated) continue;
    acc = log_add_exp(acc, -r.total_cost + offset);
  }
  if (acc == kNegInf) return kNegInf;
  return acc - std::log(static_cast<double>(n_inner));
}

double estimate_log_likelihood(PolicyParam theta, const LakeSpec& lake, const WindModel& wind,
                               const CostTable& costs, const std::vector<Seed>& seeds, double offset,
                               std::size_t max_steps, PolicyForm form) {
  if (seeds.empty()) throw std::invalid_argument("estimate_log_likelihood: no seeds");
  const LegSampler policy = theta_policy(theta, lake, costs, form);
  double acc = kNegInf;
  for (Seed seed : seeds) {
    const RolloutResult r = seeded_rollout(policy, lake, wind, costs, max_steps, seed);
    if (r.truncated) continue;
    acc = log_add_exp(acc, -r.total_cost + offset);
  }
  if (acc == kNegInf) return kNegInf;
  return acc - std::log(static_cast<double>(seeds.size()));
}

double log_theta_prior(double log_theta) { return log_theta > 0.0 ? 0.0 : kNegInf; }

std::vector<double> ThetaPosterior::theta() const {
  std::vector<double> out;
  out.reserve(log_theta.values.size());
  for (double v : log_theta.values) out.push_back(std::exp(v));
  return out;
}

ThetaPosterior infer_theta(const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                           const InferThetaOptions& options) {
  wind.validate();
  if (options.n_samples < 1) throw std::invalid_argument("infer_theta: n_samples must be at least 1");
  if (options.n_inner < 1) throw std::invalid_argument("infer_theta: n_inner must be at least 1");
  const std::size_t max_steps = options.max_steps == 0 ? default_max_steps(lake) : options.max_steps;

  ThetaPosterior out;
  out.form = options.form;
  out.offset = options.offset
                   ? *options.offset
                   : evaluate_policy(greedy_sampler(lake, costs), lake, wind, costs, 1000,
                                     derive_seed(options.seed, {0x6f6666736574ULL}), max_steps)
                         .mean_cost;

  auto estimator = [&](double log_theta, const std::vector<Seed>& seeds) {
    return estimate_log_likelihood(PolicyParam(std::exp(log_theta)), lake, wind, costs, seeds, out.offset,
                                   max_steps, options.form);
  };
  const auto n_iters = static_cast<std::size_t>(
      std::ceil(static_cast<double>(options.n_samples) / (1.0 - options.burn_in_fraction)));
  BlockPseudoMarginalConfig config{n_iters, options.n_inner, options.n_blocks, options.burn_in_fraction,
                                   options.seed};
  out.log_theta = block_pseudo_marginal_mh(estimator, log_theta_prior, GaussianWalk{options.proposal_scale},
                                           options.init_log_theta, config);
  // Rounding of n_iters can leave one extra sample.
  if (out.log_theta.values.size() > options.n_samples)
    out.log_theta.values.erase(out.log_theta.values.begin(),
                               out.log_theta.values.end() - static_cast<std::ptrdiff_t>(options.n_samples));
  return out;
}

PolicyFactory posterior_policy(const ThetaPosterior& posterior, const LakeSpec& lake, const CostTable& costs) {
  return [samples = posterior.log_theta.values, form = posterior.form, lake, costs](Rng& rng) {
    const double log_theta = samples[rng.uniform_index(samples.size())];
    return theta_policy(PolicyParam(std::exp(log_theta)), lake, costs, form);
  };
}

}  // namespace prefplan::sailing
