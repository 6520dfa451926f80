#pragma once

// Two flawed formulations of multi-agent planning as inference, kept as
// reference baselines with the numbers that expose them.

#include <string>
#include <vector>

namespace prefplan::mistakes {

struct MistakeReport {
  std::string model_name;
  /// Probability of the action the flawed model recommends.
  double policy;
  /// Value the flawed model believes it attains.
  double claimed_value;
  /// Value the recommended policy actually attains.
  double true_value;
  /// Value of the best deterministic policy.
  double rational_value;
};

/// Posterior of choosing the first bar when the other agent's anticipated
/// choice is conditioned on as if it were observed:
/// p1 q / (p1 q + (1 - p1)(1 - q)).
double future_as_present_posterior(double p1, double q_hat);

/// Symmetric agents repeatedly applying the flawed update to each other's
/// previous posterior; element 0 is the prior. Exposed for illustration.
std::vector<double> future_as_present_iterates(double p1, int depth);

/// Report for the future-as-present model: the value is the meeting
/// probability against an other agent choosing the first bar with q_hat.
MistakeReport future_as_present_report(double p1, double q_hat);

/// An evader conditions on a single sampled location of the chaser and goes
/// to the other bar. The value is the probability of evading.
MistakeReport single_sample_nesting_policy(double evader_p1, double chaser_p1);

}  // namespace prefplan::mistakes
