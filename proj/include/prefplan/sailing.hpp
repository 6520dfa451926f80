#pragma once

// The sailing problem: a boat crosses a square lake from corner (0, 0) to
// corner (size-1, size-1), moving one square per leg in one of 8 headings.
// Leg cost depends on the heading relative to the wind, and changing tack
// costs a fixed delay. The wind follows a random walk over 8 directions.
//
// Conventions:
//  - Directions are indexed clockwise from north: 0 = N (0, +1), 1 = NE,
//    2 = E (+1, 0), ... 7 = NW. The goal lies to the north-east.
//  - The wind direction is the direction the wind blows toward. A heading
//    equal to the wind direction sails dead downwind ("away"); the opposite
//    heading points into the wind.
//  - A wind shift of -1 is a counterclockwise ("left") tick, +1 clockwise.
//  - The side of the wind is the sign of the tick difference heading - wind
//    in (-4, 4]: positive is starboard, negative port. Dead downwind and
//    into the wind have no side.

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "prefplan/mcmc.hpp"
#include "prefplan/mdp.hpp"
#include "prefplan/random.hpp"

namespace prefplan::sailing {

inline constexpr int kDirections = 8;

struct Direction {
  int index = 0;

  constexpr Direction() = default;
  constexpr explicit Direction(int i) : index(((i % kDirections) + kDirections) % kDirections) {}

  constexpr Direction rotated(int ticks) const { return Direction(index + ticks); }
  constexpr bool diagonal() const { return index % 2 == 1; }
  constexpr int dx() const { return kDx[index]; }
  constexpr int dy() const { return kDy[index]; }
  /// Euclidean length of the move: 1 or sqrt(2).
  double length() const;

  friend constexpr bool operator==(Direction, Direction) = default;

 private:
  static constexpr std::array<int, kDirections> kDx{0, 1, 1, 1, 0, -1, -1, -1};
  static constexpr std::array<int, kDirections> kDy{1, 1, 0, -1, -1, -1, 0, 1};
};

const char* direction_name(Direction d);

enum class PointOfSail { away, down, cross, up, into };
enum class Tack : std::uint8_t { port = 0, starboard = 1, unset = 2 };

const char* to_string(PointOfSail p);
const char* to_string(Tack t);

struct RelativeWind {
  PointOfSail point;
  /// +1 starboard, -1 port, 0 for away and into.
  int side;
};

/// Tick difference heading - wind, normalized to (-4, 4].
int tick_difference(Direction heading, Direction wind);

RelativeWind relative_point_of_sail(Direction heading, Direction wind);

struct Position {
  int x = 0;
  int y = 0;
  friend constexpr bool operator==(Position, Position) = default;
};

class LakeSpec {
 public:
  /// Throws std::invalid_argument for size < 2.
  explicit LakeSpec(int size);
  int size() const noexcept { return size_; }
  Position start() const noexcept { return {0, 0}; }
  Position goal() const noexcept { return {size_ - 1, size_ - 1}; }
  bool contains(Position p) const noexcept { return p.x >= 0 && p.y >= 0 && p.x < size_ && p.y < size_; }
  double distance_to_goal(Position p) const;

 private:
  int size_;
};

struct WindModel {
  double p_same = 0.4;
  double p_left = 0.3;
  double p_right = 0.3;

  /// Throws std::invalid_argument unless the three probabilities are
  /// nonnegative and sum to 1.
  void validate() const;
  /// Shift in ticks: 0, -1 (left) or +1 (right).
  int sample_shift(Rng& rng) const;
};

struct CostTable {
  double up = 4.0;
  double cross = 3.0;
  double down = 2.0;
  double away = 1.0;
  double delay = 4.0;

  /// Cost per unit distance; +inf into the wind.
  double unit_cost(PointOfSail p) const;
};

struct SailingState {
  Position position;
  Direction wind;
  Tack tack = Tack::unset;
  friend bool operator==(const SailingState&, const SailingState&) = default;
};

class PolicyParam {
 public:
  /// Throws std::invalid_argument unless theta > 0.
  explicit PolicyParam(double theta);
  double theta() const noexcept { return theta_; }

 private:
  double theta_;
};

/// A leg that points into the wind or leaves the lake.
class InfeasibleLeg : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Leg {
  double cost;
  Tack tack;
};

/// Tack after sailing `heading`: the side of the wind, or unset when
/// sailing dead downwind.
Tack tack_after(Direction heading, Direction wind);

/// Cost of one leg: unit cost times leg length, plus the tacking delay when
/// the boat passes from one tack to the other. A boat without a tack (at
/// the start, or after a dead-downwind leg) pays no delay.
Leg leg_cost(const SailingState& state, Direction heading, const LakeSpec& lake, const CostTable& costs = {});

/// Set of headings as a bitmask.
class HeadingSet {
 public:
  void insert(Direction d) { bits_ |= static_cast<std::uint8_t>(1u << d.index); }
  bool contains(Direction d) const { return (bits_ >> d.index) & 1u; }
  int size() const { return __builtin_popcount(bits_); }
  bool empty() const { return bits_ == 0; }
  std::vector<Direction> to_vector() const;
  template <class F>
  void for_each(F&& f) const {
    for (int i = 0; i < kDirections; ++i)
      if ((bits_ >> i) & 1u) f(Direction(i));
  }

 private:
  std::uint8_t bits_ = 0;
};

/// All headings that stay on the lake, minus the one into the wind.
HeadingSet feasible_legs(const SailingState& state, const LakeSpec& lake);

/// Goal-directed leg distribution: log Pr(leg) = -theta * d(next, goal) - log Z
/// over feasible legs. Throws InfeasibleLeg for an infeasible heading.
double policy_log_prob(PolicyParam theta, const SailingState& state, Direction heading, const LakeSpec& lake);

/// The goal-directed leg distribution conditioned on the leg's own cost:
/// log Pr(leg) = -theta * d(next, goal) - cost(leg) - log Z. This is the
/// per-leg policy the boat follows once its trajectory is weighted by
/// exp(-travel cost). Throws InfeasibleLeg for an infeasible heading.
double leg_posterior_log_prob(PolicyParam theta, const SailingState& state, Direction heading,
                              const LakeSpec& lake, const CostTable& costs = {});

/// Log-probabilities of all 8 headings; -inf for infeasible ones.
using LegLogProbs = std::array<double, kDirections>;
LegLogProbs policy_log_probs(PolicyParam theta, const SailingState& state, const LakeSpec& lake);
LegLogProbs leg_posterior_log_probs(PolicyParam theta, const SailingState& state, const LakeSpec& lake,
                                    const CostTable& costs = {});

/// Feasible heading minimizing the next distance to the goal; ties go to
/// the cheaper leg, then to the lower direction index.
Direction greedy_policy(const SailingState& state, const LakeSpec& lake, const CostTable& costs = {});

/// Draws a heading for the current state.
using LegSampler = std::function<Direction(const SailingState&, Rng&)>;

enum class PolicyForm {
  /// policy_log_prob: goal-directed only.
  goal_directed,
  /// leg_posterior_log_prob: goal-directed and cost-conditioned.
  leg_posterior,
};

LegSampler theta_policy(PolicyParam theta, const LakeSpec& lake, const CostTable& costs = {},
                        PolicyForm form = PolicyForm::leg_posterior);
LegSampler greedy_sampler(const LakeSpec& lake, const CostTable& costs = {});

// ---------------------------------------------------------------------------
// The lake as a 2-agent MDP: the boat picks a heading, the wind (a neutral
// agent) picks a shift. Encodings: state "x:y:wind:tack", action
// "heading:shift", terminal when the boat is at the goal.

struct SailingAction {
  Direction heading;
  int wind_shift = 0;
  friend bool operator==(const SailingAction&, const SailingAction&) = default;
};

using SailingMdp = mdp::TwoAgentMdp<SailingState, Direction, int, SailingAction>;
using SailingTrajectory = mdp::EpisodeTrajectory<SailingState, SailingAction>;

SailingMdp sailing_mdp(const LakeSpec& lake, const SailingState& initial);

struct RolloutResult {
  SailingTrajectory trajectory;
  double total_cost = 0.0;
  bool truncated = false;
};

inline std::size_t default_max_steps(const LakeSpec& lake) { return 10 * static_cast<std::size_t>(lake.size()); }

/// One episode from the start corner with the wind drawn uniformly and the
/// tack unset. Truncated episodes report the cost accumulated so far.
RolloutResult rollout(const LegSampler& policy, const LakeSpec& lake, const WindModel& wind,
                      const CostTable& costs, std::size_t max_steps, Rng& rng);
RolloutResult rollout(PolicyParam theta, const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                      std::size_t max_steps, Seed seed, PolicyForm form = PolicyForm::leg_posterior);

/// One episode as a deterministic function of `seed`. The wind (initial
/// direction and shifts) and the helm draw from separate streams, so two
/// policies run from the same seed face the same wind history.
RolloutResult seeded_rollout(const LegSampler& policy, const LakeSpec& lake, const WindModel& wind,
                             const CostTable& costs, std::size_t max_steps, Seed seed);

/// Total cost of a trajectory, recomputed leg by leg.
double trajectory_cost(const SailingTrajectory& trajectory, const LakeSpec& lake, const CostTable& costs);

struct PolicyEvaluation {
  double mean_cost = 0.0;
  double std_error = 0.0;
  std::size_t n_rollouts = 0;
  std::size_t n_truncated = 0;
  /// More than 1% of rollouts were truncated.
  bool truncation_warning = false;
};

/// Builds the policy for one rollout; called once per rollout so that
/// policies with random parameters can redraw them.
using PolicyFactory = std::function<LegSampler(Rng&)>;

/// Monte-Carlo mean travel cost. Rollout i uses its own generator derived
/// from (seed, i). Requires n_rollouts >= 100.
PolicyEvaluation evaluate_policy(const PolicyFactory& policy, const LakeSpec& lake, const WindModel& wind,
                                 const CostTable& costs, std::size_t n_rollouts, Seed seed,
                                 std::size_t max_steps = 0);
PolicyEvaluation evaluate_policy(const LegSampler& policy, const LakeSpec& lake, const WindModel& wind,
                                 const CostTable& costs, std::size_t n_rollouts, Seed seed,
                                 std::size_t max_steps = 0);

// ---------------------------------------------------------------------------
// Inference of theta.

struct InferThetaOptions {
  /// Retained posterior samples; the chain runs n_samples / (1 - burn_in)
  /// iterations.
  std::size_t n_samples = 10000;
  std::size_t n_inner = 20;
  /// Blocks of rollout seeds; one block is redrawn per iteration. 1 gives
  /// plain pseudo-marginal MH.
  std::size_t n_blocks = 20;
  double proposal_scale = 0.25;
  double burn_in_fraction = 0.1;
  double init_log_theta = 1.5;
  /// Stabilizing offset c in exp(-cost + c); defaults to the greedy
  /// policy's estimated mean cost.
  std::optional<double> offset;
  std::size_t max_steps = 0;  // 0: default_max_steps(lake)
  PolicyForm form = PolicyForm::leg_posterior;
  Seed seed = 0;
};

/// Log of the Monte-Carlo estimate of E[exp(-cost + offset)] over
/// `n_inner` rollouts at theta. Truncated rollouts contribute zero; the
/// result is -inf when every rollout does.
double estimate_log_likelihood(PolicyParam theta, const LakeSpec& lake, const WindModel& wind,
                               const CostTable& costs, std::size_t n_inner, double offset, std::size_t max_steps,
                               PolicyForm form, Rng& rng);

/// The same estimate over seeded_rollout episodes, one per seed.
double estimate_log_likelihood(PolicyParam theta, const LakeSpec& lake, const WindModel& wind,
                               const CostTable& costs, const std::vector<Seed>& seeds, double offset,
                               std::size_t max_steps, PolicyForm form);

/// Improper flat prior on log theta over (0, inf).
double log_theta_prior(double log_theta);

struct ThetaPosterior {
  /// Samples of log theta.
  PosteriorSamples log_theta;
  double offset = 0.0;
  PolicyForm form = PolicyForm::leg_posterior;
  std::vector<double> theta() const;
};

/// Block pseudo-marginal Metropolis-Hastings over log theta with a Gaussian
/// random-walk proposal, starting at init_log_theta.
ThetaPosterior infer_theta(const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                           const InferThetaOptions& options);

/// Policy factory drawing theta per rollout from the posterior samples.
PolicyFactory posterior_policy(const ThetaPosterior& posterior, const LakeSpec& lake, const CostTable& costs);

// ---------------------------------------------------------------------------
// Value iteration.

/// Dense value table over (x, y, wind, tack).
class ValueFunction {
 public:
  ValueFunction(LakeSpec lake, Eigen::ArrayXd values, std::vector<double> residuals);

  static std::size_t index(const LakeSpec& lake, const SailingState& s) {
    const auto n = static_cast<std::size_t>(lake.size());
    return ((static_cast<std::size_t>(s.position.x) * n + static_cast<std::size_t>(s.position.y)) * kDirections +
            static_cast<std::size_t>(s.wind.index)) *
               3 +
           static_cast<std::size_t>(s.tack);
  }
  static std::size_t state_count(const LakeSpec& lake) {
    const auto n = static_cast<std::size_t>(lake.size());
    return n * n * kDirections * 3;
  }

  const LakeSpec& lake() const noexcept { return lake_; }
  const Eigen::ArrayXd& values() const noexcept { return values_; }
  double at(const SailingState& s) const { return values_[static_cast<Eigen::Index>(index(lake_, s))]; }
  /// Expected cost from the start corner: mean over the 8 initial winds
  /// with the tack unset.
  double start_value() const;
  /// Max-norm change per sweep.
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  LakeSpec lake_;
  Eigen::ArrayXd values_;
  std::vector<double> residuals_;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Jacobi value iteration for the minimal expected cost-to-go, starting
/// from zero; stops when the max-norm residual drops below `tolerance`.
/// Throws ConvergenceError after `max_sweeps` sweeps.
ValueFunction solve_optimal_values(const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                                   double tolerance, std::size_t max_sweeps = 100000);

double optimal_expected_cost(const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                             double tolerance);

/// Heading attaining the minimum in the Bellman equation; ties go to the
/// lower direction index.
Direction optimal_heading(const ValueFunction& values, const SailingState& state, const WindModel& wind,
                          const CostTable& costs);

LegSampler optimal_sampler(const ValueFunction& values, const WindModel& wind, const CostTable& costs);

/// Leg distribution of a stationary policy: probabilities over the 8
/// headings, zero for infeasible ones.
using LegDistribution = std::function<std::array<double, kDirections>(const SailingState&)>;

/// Exact expected cost of a stationary policy by iterative policy
/// evaluation; same stopping rule as solve_optimal_values.
ValueFunction evaluate_policy_exact(const LegDistribution& policy, const LakeSpec& lake, const WindModel& wind,
                                    const CostTable& costs, double tolerance, std::size_t max_sweeps = 100000);

/// Exact log E[exp(-cost)] over episodes of the theta policy, computed by
/// fixed-point iteration over the state space instead of by rollouts; the
/// quantity estimate_log_likelihood estimates, without the offset and
/// without truncation. The tolerance is relative, per state.
double exact_log_likelihood(PolicyParam theta, const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                            PolicyForm form, double tolerance = 1e-12, std::size_t max_sweeps = 100000);

}  // namespace prefplan::sailing
