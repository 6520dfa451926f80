#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

#include "prefplan/random.hpp"

namespace prefplan {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class Scalar>
Scalar logistic(Scalar x) {
  using std::exp;
  return x >= Scalar(0) ? Scalar(1) / (Scalar(1) + exp(-x)) : exp(x) / (Scalar(1) + exp(x));
}

template <class Scalar>
Scalar logit(Scalar p) {
  using std::log;
  return log(p / (Scalar(1) - p));
}

/// log(exp(a) + exp(b)) without overflow.
template <class Scalar>
Scalar log_add_exp(Scalar a, Scalar b) {
  using std::exp;
  using std::log1p;
  if (a == -std::numeric_limits<Scalar>::infinity()) return b;
  if (b == -std::numeric_limits<Scalar>::infinity()) return a;
  return a > b ? a + log1p(exp(b - a)) : b + log1p(exp(a - b));
}

/// A distribution over finitely many distinct outcomes.
///
/// Weights are validated on construction: nonnegative and summing to one
/// within 1e-12. Outcomes must be equality-comparable.
template <class Outcome>
class FiniteDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  FiniteDistribution(std::vector<Outcome> support, std::vector<double> weights)
      : support_(std::move(support)), weights_(std::move(weights)) {
    if (support_.empty()) throw std::invalid_argument("FiniteDistribution: empty support");
    if (support_.size() != weights_.size())
      throw std::invalid_argument("FiniteDistribution: support and weights differ in length");
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0)) throw std::invalid_argument("FiniteDistribution: negative or NaN weight");
      total += w;
    }
    if (std::abs(total - 1.0) > kSumTolerance)
      throw std::invalid_argument("FiniteDistribution: weights do not sum to 1");
    for (std::size_t i = 0; i < support_.size(); ++i)
      for (std::size_t j = i + 1; j < support_.size(); ++j)
        if (support_[i] == support_[j])
          throw std::invalid_argument("FiniteDistribution: duplicate outcome");
  }

  std::size_t size() const noexcept { return support_.size(); }
  const std::vector<Outcome>& support() const noexcept { return support_; }
  const std::vector<double>& weights() const noexcept { return weights_; }
  // By value: std::vector<bool> has no element references.
  Outcome outcome(std::size_t i) const { return support_.at(i); }
  double weight(std::size_t i) const { return weights_.at(i); }

  /// Probability of an outcome; zero when it is outside the support.
  double probability(const Outcome& y) const {
    for (std::size_t i = 0; i < support_.size(); ++i)
      if (support_[i] == y) return weights_[i];
    return 0.0;
  }

  Outcome sample(Rng& rng) const { return support_[rng.categorical(weights_)]; }

 private:
  std::vector<Outcome> support_;
  std::vector<double> weights_;
};

/// Bernoulli(q) over {true, false}.
inline FiniteDistribution<bool> bernoulli(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("bernoulli: q outside [0, 1]");
  return FiniteDistribution<bool>({true, false}, {q, 1.0 - q});
}

inline FiniteDistribution<bool> point_mass(bool y) { return bernoulli(y ? 1.0 : 0.0); }

/// alpha * a + (1 - alpha) * b for two distributions over the same support,
/// listed in the same order.
template <class Outcome>
FiniteDistribution<Outcome> mixture(const FiniteDistribution<Outcome>& a,
                                    const FiniteDistribution<Outcome>& b, double alpha) {
  if (a.support() != b.support())
    throw std::invalid_argument("mixture: supports differ");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("mixture: alpha outside [0, 1]");
  std::vector<double> w(a.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = alpha * a.weight(i) + (1.0 - alpha) * b.weight(i);
  return FiniteDistribution<Outcome>(a.support(), std::move(w));
}

/// Log of the stochastic-conditioning density p(y ~ D | x) for a finitely
/// supported D: the q-weighted sum of the conditional log-likelihoods,
///
///   sum_y q(y) log p(y | x).
///
/// Outcomes with zero weight are skipped, so an impossible outcome only
/// matters if D can produce it; in that case the result is -inf.
/// Exceptions thrown by `log_density` propagate.
template <class Outcome, class LogDensity>
double stochastic_log_weight(LogDensity&& log_density, const FiniteDistribution<Outcome>& dist) {
  double total = 0.0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double q = dist.weight(i);
    if (q == 0.0) continue;
    const double lp = log_density(dist.outcome(i));
    if (lp == kNegInf) return kNegInf;
    total += q * lp;
  }
  return total;
}

}  // namespace prefplan
