#include <algorithm>
#include <cmath>
#include <limits>

#include "prefplan/sailing.hpp"

namespace prefplan::sailing {

ValueFunction::ValueFunction(LakeSpec lake, Eigen::ArrayXd values, std::vector<double> residuals)
    : lake_(lake), values_(std::move(values)), residuals_(std::move(residuals)) {
  if (static_cast<std::size_t>(values_.size()) != state_count(lake_))
    throw std::invalid_argument("ValueFunction: table size does not match the lake");
}

double ValueFunction::start_value() const {
  double total = 0.0;
  for (int w = 0; w < kDirections; ++w) total += at(SailingState{lake_.start(), Direction(w), Tack::unset});
  return total / kDirections;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Leg quantities that depend only on wind, tack and heading.
struct LegTable {
  // cost[w][t][h]; +inf into the wind.
  std::array<std::array<std::array<double, kDirections>, 3>, kDirections> cost{};
  std::array<std::array<Tack, kDirections>, kDirections> tack{};

  explicit LegTable(const CostTable& costs) {
    for (int w = 0; w < kDirections; ++w)
      for (int h = 0; h < kDirections; ++h) {
        const Direction heading(h);
        const Direction wind(w);
        tack[w][h] = tack_after(heading, wind);
        const double base = costs.unit_cost(relative_point_of_sail(heading, wind).point) * heading.length();
        for (int t = 0; t < 3; ++t) {
          const bool flip = t != static_cast<int>(Tack::unset) && tack[w][h] != Tack::unset &&
                            static_cast<int>(tack[w][h]) != t;
          cost[w][t][h] = base + (flip ? costs.delay : 0.0);
        }
      }
  }
};

// Expected next value for each heading from (x, y) under wind w, before the
// leg cost; +inf for infeasible headings.
std::array<double, kDirections> expected_next(const LakeSpec& lake, const LegTable& legs, const WindModel& wind,
                                              const Eigen::ArrayXd& v, int x, int y, int w) {
  std::array<double, kDirections> out;
  out.fill(kInf);
  for (int h = 0; h < kDirections; ++h) {
    if (std::isinf(legs.cost[w][0][h])) continue;
    const Direction heading(h);
    const Position next{x + heading.dx(), y + heading.dy()};
    if (!lake.contains(next)) continue;
    const Tack t = legs.tack[w][h];
    auto value = [&](int shift) {
      return v[static_cast<Eigen::Index>(ValueFunction::index(lake, SailingState{next, Direction(w + shift), t}))];
    };
    out[h] = wind.p_same * value(0) + wind.p_left * value(-1) + wind.p_right * value(1);
  }
  return out;
}

// Runs sweeps of `update` until the max-norm residual drops below tolerance.
// `update(ev, state)` returns the new value of a non-goal state given the
// expected next value of each heading.
template <class Update>
ValueFunction iterate(const LakeSpec& lake, const WindModel& wind, const LegTable& legs, double tolerance,
                      std::size_t max_sweeps, Update&& update, const char* what, double goal_value = 0.0,
                      bool relative = false) {
  wind.validate();
  if (!(tolerance > 0.0)) throw std::invalid_argument(std::string(what) + ": tolerance must be positive");
  const auto n_states = static_cast<Eigen::Index>(ValueFunction::state_count(lake));
  Eigen::ArrayXd v = Eigen::ArrayXd::Zero(n_states);
  const Position goal = lake.goal();
  for (int w = 0; w < kDirections; ++w)
    for (int t = 0; t < 3; ++t)
      v[static_cast<Eigen::Index>(ValueFunction::index(lake, SailingState{goal, Direction(w), Tack(t)}))] = goal_value;
  Eigen::ArrayXd next = v;
  std::vector<double> residuals;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (int x = 0; x < lake.size(); ++x)
      for (int y = 0; y < lake.size(); ++y) {
        if (Position{x, y} == goal) continue;
        for (int w = 0; w < kDirections; ++w) {
          const auto ev = expected_next(lake, legs, wind, v, x, y, w);
          for (int t = 0; t < 3; ++t) {
            const SailingState s{Position{x, y}, Direction(w), Tack(t)};
            next[static_cast<Eigen::Index>(ValueFunction::index(lake, s))] = update(ev, s);
          }
        }
      }
    const double residual = relative ? ((next - v).abs() / next.abs().max(std::numeric_limits<double>::min())).maxCoeff()
                                     : (next - v).abs().maxCoeff();
    residuals.push_back(residual);
    v.swap(next);
    if (!std::isfinite(residual))
      throw ConvergenceError(std::string(what) + ": values diverged; some state cannot reach the goal");
    if (residual < tolerance) return ValueFunction(lake, std::move(v), std::move(residuals));
  }
  throw ConvergenceError(std::string(what) + ": no convergence after " + std::to_string(max_sweeps) + " sweeps");
}

// Bellman minimum over headings; returns the value and the argmin, ties to
// the lower index.
std::pair<double, int> best_heading(const std::array<double, kDirections>& ev, const LegTable& legs,
                                    const SailingState& s) {
  double best = kInf;
  int arg = -1;
  for (int h = 0; h < kDirections; ++h) {
    const double q = legs.cost[s.wind.index][static_cast<int>(s.tack)][h] + ev[h];
    if (q < best) {
      best = q;
      arg = h;
    }
  }
  return {best, arg};
}

}  // namespace

ValueFunction solve_optimal_values(const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                                   double tolerance, std::size_t max_sweeps) {
  const LegTable legs(costs);
  return iterate(
      lake, wind, legs, tolerance, max_sweeps,
      [&](const std::array<double, kDirections>& ev, const SailingState& s) { return best_heading(ev, legs, s).first; },
      "solve_optimal_values");
}

double optimal_expected_cost(const LakeSpec& lake, const WindModel& wind, const CostTable& costs, double tolerance) {
  return solve_optimal_values(lake, wind, costs, tolerance).start_value();
}

Direction optimal_heading(const ValueFunction& values, const SailingState& state, const WindModel& wind,
                          const CostTable& costs) {
  const LakeSpec& lake = values.lake();
  if (!lake.contains(state.position)) throw std::invalid_argument("optimal_heading: state is off the lake");
  if (state.position == lake.goal()) throw std::invalid_argument("optimal_heading: state is the goal");
  const LegTable legs(costs);
  const auto ev = expected_next(lake, legs, wind, values.values(), state.position.x, state.position.y,
                                state.wind.index);
  return Direction(best_heading(ev, legs, state).second);
}

LegSampler optimal_sampler(const ValueFunction& values, const WindModel& wind, const CostTable& costs) {
  return [values, wind, costs](const SailingState& s, Rng&) { return optimal_heading(values, s, wind, costs); };
}

ValueFunction evaluate_policy_exact(const LegDistribution& policy, const LakeSpec& lake, const WindModel& wind,
                                    const CostTable& costs, double tolerance, std::size_t max_sweeps) {
  const LegTable legs(costs);
  // The policy does not change between sweeps; tabulate it once.
  std::vector<std::array<double, kDirections>> probs(ValueFunction::state_count(lake));
  for (int x = 0; x < lake.size(); ++x)
    for (int y = 0; y < lake.size(); ++y)
      for (int w = 0; w < kDirections; ++w)
        for (int t = 0; t < 3; ++t) {
          const SailingState s{Position{x, y}, Direction(w), Tack(t)};
          if (s.position == lake.goal()) continue;
          const auto p = policy(s);
          const HeadingSet ok = feasible_legs(s, lake);
          for (int h = 0; h < kDirections; ++h)
            if (p[h] > 0.0 && !ok.contains(Direction(h)))
              throw InfeasibleLeg("evaluate_policy_exact: policy puts mass on an infeasible leg");
          probs[ValueFunction::index(lake, s)] = p;
        }
  return iterate(
      lake, wind, legs, tolerance, max_sweeps,
      [&](const std::array<double, kDirections>& ev, const SailingState& s) {
        const auto& p = probs[ValueFunction::index(lake, s)];
        double total = 0.0;
        for (int h = 0; h < kDirections; ++h)
          if (p[h] > 0.0) total += p[h] * (legs.cost[s.wind.index][static_cast<int>(s.tack)][h] + ev[h]);
        return total;
      },
      "evaluate_policy_exact");
}

double exact_log_likelihood(PolicyParam theta, const LakeSpec& lake, const WindModel& wind, const CostTable& costs,
                            PolicyForm form, double tolerance, std::size_t max_sweeps) {
  const LegTable legs(costs);
  std::vector<std::array<double, kDirections>> weights(ValueFunction::state_count(lake));
  for (int x = 0; x < lake.size(); ++x)
    for (int y = 0; y < lake.size(); ++y)
      for (int w = 0; w < kDirections; ++w)
        for (int t = 0; t < 3; ++t) {
          const SailingState s{Position{x, y}, Direction(w), Tack(t)};
          if (s.position == lake.goal()) continue;
          const LegLogProbs lp = form == PolicyForm::goal_directed ? policy_log_probs(theta, s, lake)
                                                                   : leg_posterior_log_probs(theta, s, lake, costs);
          auto& out = weights[ValueFunction::index(lake, s)];
          for (int h = 0; h < kDirections; ++h)
            out[h] = lp[h] == kNegInf ? 0.0 : std::exp(lp[h] - legs.cost[w][t][h]);
        }
  // Absorption probabilities weighted by exp(-cost): the expectation of
  // exp(-cost to go) satisfies the same recursion as a value function with
  // multiplicative discounts.
  const ValueFunction v = iterate(
      lake, wind, legs, tolerance, max_sweeps,
      [&](const std::array<double, kDirections>& ev, const SailingState& s) {
        const auto& wt = weights[ValueFunction::index(lake, s)];
        double total = 0.0;
        for (int h = 0; h < kDirections; ++h)
          if (wt[h] > 0.0) total += wt[h] * ev[h];
        return total;
      },
      "exact_log_likelihood", 1.0, true);
  return std::log(v.start_value());
}

}  // namespace prefplan::sailing
