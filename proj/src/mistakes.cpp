#include "prefplan/mistakes.hpp"

#include <algorithm>
#include <stdexcept>

namespace prefplan::mistakes {

namespace {

void require_open_unit(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument(std::string(what) + " must lie in (0, 1)");
}

}  // namespace

double future_as_present_posterior(double p1, double q_hat) {
  require_open_unit(p1, "p1");
  if (!(q_hat >= 0.0 && q_hat <= 1.0)) throw std::invalid_argument("q_hat must lie in [0, 1]");
  const double first = p1 * q_hat;
  return first / (first + (1.0 - p1) * (1.0 - q_hat));
}

std::vector<double> future_as_present_iterates(double p1, int depth) {
  if (depth < 0) throw std::invalid_argument("future_as_present_iterates: negative depth");
  std::vector<double> out{p1};
  for (int d = 1; d <= depth; ++d) out.push_back(future_as_present_posterior(p1, out.back()));
  return out;
}

MistakeReport future_as_present_report(double p1, double q_hat) {
  const double p = future_as_present_posterior(p1, q_hat);
  return {"future-as-present", p,
          1.0,  // conditioning on the meeting treats it as certain
          p * q_hat + (1.0 - p) * (1.0 - q_hat), std::max(q_hat, 1.0 - q_hat)};
}

MistakeReport single_sample_nesting_policy(double evader_p1, double chaser_p1) {
  require_open_unit(evader_p1, "evader_p1");
  require_open_unit(chaser_p1, "chaser_p1");
  // Evader prior x sampled chaser location, conditioned on the two differing.
  const double second_vs_first = (1.0 - evader_p1) * chaser_p1;
  const double first_vs_second = evader_p1 * (1.0 - chaser_p1);
  const double p_second = second_vs_first / (second_vs_first + first_vs_second);
  // Against the real chaser the evader escapes when their bars differ.
  const double evasion = p_second * chaser_p1 + (1.0 - p_second) * (1.0 - chaser_p1);
  return {"single-sample-nesting", p_second, 1.0, evasion, std::max(chaser_p1, 1.0 - chaser_p1)};
}

}  // namespace prefplan::mistakes
