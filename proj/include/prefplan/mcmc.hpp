#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "prefplan/distributions.hpp"
#include "prefplan/random.hpp"

namespace prefplan {

/// Thrown when a chain cannot start, e.g. the target is -inf at the
/// initial state.
class ChainConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PosteriorSamples {
  std::vector<double> values;
  double acceptance_rate = 0.0;
  Seed seed = 0;
  std::size_t burn_in = 0;
  /// Candidates rejected because their likelihood estimate was not finite.
  std::size_t nonfinite_rejections = 0;

  double mean() const;
  double variance() const;
  /// Naive standard error, sd / sqrt(n); ignores autocorrelation.
  double std_error() const { return std::sqrt(variance() / static_cast<double>(values.size())); }
  /// Empirical quantile by linear interpolation of order statistics.
  double quantile(double p) const;
  /// Every k-th retained sample such that `count` values remain.
  PosteriorSamples thinned(std::size_t count) const;
};

/// Writes "index,value" rows with a header; the value column is named by
/// `value_column`.
void write_csv(std::ostream& out, const PosteriorSamples& samples,
               const std::string& value_column = "value");

/// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

struct ChainConfig {
  std::size_t n_iters = 1000;
  double burn_in_fraction = 0.1;
  Seed seed = 0;
};

struct PseudoMarginalConfig {
  std::size_t n_iters = 1000;
  std::size_t n_inner = 1;
  double burn_in_fraction = 0.1;
  Seed seed = 0;
};

namespace detail {

inline std::size_t checked_burn_in(std::size_t n_iters, double burn_in_fraction) {
  if (n_iters < 1) throw std::invalid_argument("chain: n_iters must be at least 1");
  if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0))
    throw std::invalid_argument("chain: burn_in_fraction must lie in [0, 1)");
  const auto burn_in = static_cast<std::size_t>(static_cast<double>(n_iters) * burn_in_fraction);
  if (burn_in >= n_iters) throw std::invalid_argument("chain: no iterations left after burn-in");
  return burn_in;
}

inline bool accept(double log_ratio, Rng& rng) {
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

}  // namespace detail

/// Random-walk Metropolis-Hastings with a symmetric proposal.
///
/// `target(state)` returns the unnormalized log density; `propose(state, rng)`
/// returns a candidate. The retained states are converted to double, so
/// `State` may be bool, an integer, or a real. Identical inputs and seed
/// give identical samples.
template <class State, class Target, class Propose>
PosteriorSamples mh_chain(Target&& target, Propose&& propose, State init, const ChainConfig& config) {
  const std::size_t burn_in = detail::checked_burn_in(config.n_iters, config.burn_in_fraction);
  double current_lp = target(init);
  if (!std::isfinite(current_lp))
    throw ChainConfigError("mh_chain: target log density is not finite at the initial state");

  Rng rng(config.seed);
  State current = std::move(init);
  PosteriorSamples out;
  out.seed = config.seed;
  out.burn_in = burn_in;
  out.values.reserve(config.n_iters - burn_in);
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < config.n_iters; ++i) {
    State candidate = propose(static_cast<const State&>(current), rng);
    const double candidate_lp = target(static_cast<const State&>(candidate));
    if (candidate_lp != kNegInf && detail::accept(candidate_lp - current_lp, rng)) {
      current = std::move(candidate);
      current_lp = candidate_lp;
      ++accepted;
    }
    if (i >= burn_in) out.values.push_back(static_cast<double>(current));
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.n_iters);
  return out;
}

/// Pseudo-marginal Metropolis-Hastings over a real parameter.
///
/// `estimate(theta, n_inner, rng)` returns the log of a nonnegative unbiased
/// estimate of the likelihood at theta; unbiasedness is the caller's
/// responsibility. The estimate is drawn once per proposed point and kept
/// with the current state until the next acceptance. A candidate with an
/// infinite log prior is rejected without estimating; a non-finite estimate
/// rejects the candidate and is counted in `nonfinite_rejections`.
template <class Estimator, class LogPrior, class Propose>
PosteriorSamples pseudo_marginal_mh(Estimator&& estimate, LogPrior&& log_prior, Propose&& propose,
                                    double init, const PseudoMarginalConfig& config) {
  const std::size_t burn_in = detail::checked_burn_in(config.n_iters, config.burn_in_fraction);
  if (config.n_inner < 1) throw std::invalid_argument("pseudo_marginal_mh: n_inner must be at least 1");

  Rng rng(config.seed);
  const double init_prior = log_prior(init);
  if (!std::isfinite(init_prior))
    throw ChainConfigError("pseudo_marginal_mh: prior is not finite at the initial state");
  const double init_estimate = estimate(init, config.n_inner, rng);
  if (!std::isfinite(init_estimate))
    throw ChainConfigError("pseudo_marginal_mh: likelihood estimate is not finite at the initial state");

  double current = init;
  double current_lp = init_prior + init_estimate;
  PosteriorSamples out;
  out.seed = config.seed;
  out.burn_in = burn_in;
  out.values.reserve(config.n_iters - burn_in);
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < config.n_iters; ++i) {
    const double candidate = propose(current, rng);
    const double prior = log_prior(candidate);
    if (prior != kNegInf) {
      const double estimated = estimate(candidate, config.n_inner, rng);
      if (!std::isfinite(estimated)) {
        ++out.nonfinite_rejections;
      } else if (detail::accept(prior + estimated - current_lp, rng)) {
        current = candidate;
        current_lp = prior + estimated;
        ++accepted;
      }
    }
    if (i >= burn_in) out.values.push_back(current);
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.n_iters);
  return out;
}

struct BlockPseudoMarginalConfig {
  std::size_t n_iters = 1000;
  std::size_t n_inner = 1;
  /// The n_inner auxiliary seeds are split into this many blocks; each
  /// iteration redraws one block. One block is plain pseudo-marginal MH.
  std::size_t n_blocks = 1;
  double burn_in_fraction = 0.1;
  Seed seed = 0;
};

/// Pseudo-marginal Metropolis-Hastings with the estimator's randomness made
/// explicit: `estimate(theta, seeds)` must be a deterministic function of
/// theta and the n_inner seeds, and unbiased when the seeds are drawn
/// independently. Each iteration proposes theta together with fresh seeds
/// for one block chosen uniformly at random, so estimates at the current
/// and proposed points share the remaining seeds. The chain still targets
/// the exact posterior. Rejection rules match pseudo_marginal_mh.
template <class Estimator, class LogPrior, class Propose>
PosteriorSamples block_pseudo_marginal_mh(Estimator&& estimate, LogPrior&& log_prior, Propose&& propose,
                                          double init, const BlockPseudoMarginalConfig& config) {
  const std::size_t burn_in = detail::checked_burn_in(config.n_iters, config.burn_in_fraction);
  if (config.n_inner < 1) throw std::invalid_argument("block_pseudo_marginal_mh: n_inner must be at least 1");
  if (config.n_blocks < 1 || config.n_blocks > config.n_inner)
    throw std::invalid_argument("block_pseudo_marginal_mh: n_blocks must lie in [1, n_inner]");

  Rng rng(config.seed);
  std::vector<Seed> seeds(config.n_inner);
  for (Seed& s : seeds) s = rng.next_u64();
  const double init_prior = log_prior(init);
  if (!std::isfinite(init_prior))
    throw ChainConfigError("block_pseudo_marginal_mh: prior is not finite at the initial state");
  const double init_estimate = estimate(init, static_cast<const std::vector<Seed>&>(seeds));
  if (!std::isfinite(init_estimate))
    throw ChainConfigError("block_pseudo_marginal_mh: likelihood estimate is not finite at the initial state");

  double current = init;
  double current_lp = init_prior + init_estimate;
  PosteriorSamples out;
  out.seed = config.seed;
  out.burn_in = burn_in;
  out.values.reserve(config.n_iters - burn_in);
  std::size_t accepted = 0;
  std::vector<Seed> candidate_seeds;
  for (std::size_t i = 0; i < config.n_iters; ++i) {
    const double candidate = propose(current, rng);
    // Block b holds seeds [b * n / k, (b + 1) * n / k).
    const std::size_t b = rng.uniform_index(config.n_blocks);
    candidate_seeds = seeds;
    for (std::size_t j = b * config.n_inner / config.n_blocks; j < (b + 1) * config.n_inner / config.n_blocks; ++j)
      candidate_seeds[j] = rng.next_u64();
    const double prior = log_prior(candidate);
    if (prior != kNegInf) {
      const double estimated = estimate(candidate, static_cast<const std::vector<Seed>&>(candidate_seeds));
      if (!std::isfinite(estimated)) {
        ++out.nonfinite_rejections;
      } else if (detail::accept(prior + estimated - current_lp, rng)) {
        current = candidate;
        current_lp = prior + estimated;
        seeds.swap(candidate_seeds);
        ++accepted;
      }
    }
    if (i >= burn_in) out.values.push_back(current);
  }
  out.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(config.n_iters);
  return out;
}

/// Gaussian random-walk proposal for real-valued chains.
struct GaussianWalk {
  double scale = 1.0;
  double operator()(double x, Rng& rng) const { return x + scale * rng.normal(); }
};

/// Proposal for binary chains: always move to the other state.
struct FlipProposal {
  bool operator()(bool x, Rng&) const { return !x; }
};

}  // namespace prefplan
