#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "prefplan/distributions.hpp"
#include "prefplan/mcmc.hpp"

using namespace prefplan;

namespace {

double meet_log_density(bool other_first) { return other_first ? std::log(0.9) : std::log(0.1); }

// Log of a mean-one lognormal multiplier, averaged over n draws.
double noisy_log_weight(double exact_log, std::size_t n, Rng& rng) {
  const double sigma = 0.5;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += std::exp(sigma * rng.normal() - 0.5 * sigma * sigma);
  return exact_log + std::log(total / static_cast<double>(n));
}

double gaussian_log(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("stochastic conditioning on a Bernoulli belief") {
  const double lw = stochastic_log_weight(meet_log_density, bernoulli(0.55));
  CHECK(lw == doctest::Approx(0.55 * std::log(0.9) + 0.45 * std::log(0.1)).epsilon(1e-15));
  CHECK(lw == doctest::Approx(-1.09411).epsilon(1e-5));
}

TEST_CASE("a point mass reduces to ordinary conditioning") {
  CHECK(stochastic_log_weight(meet_log_density, point_mass(true)) == std::log(0.9));
  CHECK(stochastic_log_weight(meet_log_density, point_mass(false)) == std::log(0.1));
}

TEST_CASE("the log weight is linear in the mixture weight") {
  const auto a = bernoulli(0.2), b = bernoulli(0.9);
  for (double alpha : {0.0, 0.1, 0.5, 0.77, 1.0}) {
    const double mixed = stochastic_log_weight(meet_log_density, mixture(a, b, alpha));
    const double combined = alpha * stochastic_log_weight(meet_log_density, a) +
                            (1 - alpha) * stochastic_log_weight(meet_log_density, b);
    CHECK(mixed == doctest::Approx(combined).epsilon(1e-12));
  }
}

TEST_CASE("impossible outcomes") {
  auto only_first = [](bool y) { return y ? 0.0 : kNegInf; };
  CHECK(stochastic_log_weight(only_first, point_mass(true)) == 0.0);
  CHECK(stochastic_log_weight(only_first, bernoulli(0.99)) == kNegInf);
}

TEST_CASE("finite distributions are validated") {
  CHECK_THROWS_AS(FiniteDistribution<int>({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution<int>({1, 2}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution<int>({1, 2}, {0.5, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution<int>({1, 2}, {1.5, -0.5}), std::invalid_argument);
  CHECK_THROWS_AS(FiniteDistribution<int>({1, 1}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(bernoulli(1.1), std::invalid_argument);
  const FiniteDistribution<int> d({3, 5}, {0.25, 0.75});
  CHECK(d.probability(5) == 0.75);
  CHECK(d.probability(4) == 0.0);
}

TEST_CASE("log-space helpers") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(-800.0) >= 0.0);
  CHECK(logistic(800.0) == 1.0);
  CHECK(logit(logistic(1.3)) == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(log_add_exp(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(log_add_exp(kNegInf, 1.0) == 1.0);
  CHECK(log_add_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
}

TEST_CASE("MH on a Bernoulli target") {
  auto target = [](bool x) { return std::log(x ? 0.7 : 0.3); };
  const auto s = mh_chain(target, FlipProposal{}, false, ChainConfig{50000, 0.1, 17});
  CHECK(s.values.size() == 45000);
  CHECK(s.burn_in == 5000);
  CHECK(s.mean() >= 0.69);
  CHECK(s.mean() <= 0.71);
  CHECK(s.acceptance_rate >= 0.0);
  CHECK(s.acceptance_rate <= 1.0);
}

TEST_CASE("MH on a Gaussian target") {
  auto target = [](double x) { return gaussian_log(x, 1.0, 2.0); };
  const auto s = mh_chain(target, GaussianWalk{2.5}, 0.0, ChainConfig{200000, 0.1, 3});
  CHECK(s.mean() == doctest::Approx(1.0).epsilon(0.05));
  CHECK(s.variance() == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("a constant target accepts every proposal") {
  const auto s = mh_chain([](double) { return 0.0; }, GaussianWalk{1.0}, 0.0, ChainConfig{1000, 0.0, 1});
  CHECK(s.acceptance_rate == 1.0);
}

TEST_CASE("chains are deterministic given the seed") {
  auto target = [](double x) { return gaussian_log(x, 0.0, 1.0); };
  const auto a = mh_chain(target, GaussianWalk{1.0}, 0.0, ChainConfig{2000, 0.1, 99});
  const auto b = mh_chain(target, GaussianWalk{1.0}, 0.0, ChainConfig{2000, 0.1, 99});
  const auto c = mh_chain(target, GaussianWalk{1.0}, 0.0, ChainConfig{2000, 0.1, 100});
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("chain configuration errors") {
  auto target = [](double x) { return x > 0 ? 0.0 : kNegInf; };
  CHECK_THROWS_AS(mh_chain(target, GaussianWalk{}, -1.0, ChainConfig{}), ChainConfigError);
  CHECK_THROWS_AS(mh_chain(target, GaussianWalk{}, 1.0, ChainConfig{0, 0.1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(mh_chain(target, GaussianWalk{}, 1.0, ChainConfig{10, 1.0, 0}), std::invalid_argument);
  // Moves into the -inf region are never accepted.
  const auto s = mh_chain(target, GaussianWalk{3.0}, 1.0, ChainConfig{5000, 0.0, 2});
  for (double v : s.values) CHECK(v > 0.0);
}

TEST_CASE("pseudo-marginal MH with an exact estimator matches plain MH") {
  auto exact = [](double x) { return gaussian_log(x, 0.5, 1.0); };
  const auto pm = pseudo_marginal_mh([&](double x, std::size_t, Rng&) { return exact(x); },
                                     [](double) { return 0.0; }, GaussianWalk{1.5}, 0.0,
                                     PseudoMarginalConfig{100000, 1, 0.1, 4});
  const auto mh = mh_chain(exact, GaussianWalk{1.5}, 0.0, ChainConfig{100000, 0.1, 5});
  CHECK(std::abs(pm.mean() - mh.mean()) < 0.05);
  CHECK(std::abs(pm.variance() - mh.variance()) < 0.05);
}

TEST_CASE("pseudo-marginal MH recovers a peak from noisy estimates") {
  auto estimate = [](double theta, std::size_t n, Rng& rng) {
    return noisy_log_weight(gaussian_log(theta, 2.0, 0.3), n, rng);
  };
  const auto s = pseudo_marginal_mh(estimate, [](double) { return 0.0; }, GaussianWalk{0.5}, 0.0,
                                    PseudoMarginalConfig{40000, 4, 0.1, 8});
  CHECK(s.mean() >= 1.8);
  CHECK(s.mean() <= 2.2);
  CHECK(s.nonfinite_rejections == 0);
}

TEST_CASE("block pseudo-marginal MH targets the exact posterior") {
  // Per-seed lognormal noise: a deterministic function of theta and the seeds.
  auto estimate = [](double theta, const std::vector<Seed>& seeds) {
    double total = 0.0;
    for (Seed s : seeds) {
      Rng rng(derive_seed(s, {bits_of(theta)}));
      total += std::exp(0.5 * rng.normal() - 0.125);
    }
    return gaussian_log(theta, 2.0, 0.3) + std::log(total / static_cast<double>(seeds.size()));
  };
  for (std::size_t blocks : {std::size_t{1}, std::size_t{4}}) {
    const auto s = block_pseudo_marginal_mh(estimate, [](double) { return 0.0; }, GaussianWalk{0.5}, 0.0,
                                            BlockPseudoMarginalConfig{40000, 4, blocks, 0.1, 12});
    CHECK(s.mean() == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::sqrt(s.variance()) == doctest::Approx(0.3).epsilon(0.1));
  }
}

TEST_CASE("block pseudo-marginal MH redraws one block of seeds per iteration") {
  std::vector<Seed> previous;
  std::size_t max_changed = 0;
  auto estimate = [&](double, const std::vector<Seed>& seeds) {
    if (!previous.empty()) {
      std::size_t changed = 0;
      for (std::size_t i = 0; i < seeds.size(); ++i) changed += seeds[i] != previous[i];
      max_changed = std::max(max_changed, changed);
    }
    previous = seeds;
    return 0.0;
  };
  block_pseudo_marginal_mh(estimate, [](double) { return 0.0; }, GaussianWalk{1.0}, 0.0,
                           BlockPseudoMarginalConfig{500, 12, 4, 0.0, 1});
  CHECK(max_changed <= 3);
  CHECK(max_changed >= 1);
}

TEST_CASE("pseudo-marginal configuration errors") {
  auto flat = [](double) { return 0.0; };
  auto fine = [](double, std::size_t, Rng&) { return 0.0; };
  auto broken = [](double, std::size_t, Rng&) { return kNegInf; };
  CHECK_THROWS_AS(pseudo_marginal_mh(broken, flat, GaussianWalk{}, 0.0, PseudoMarginalConfig{}), ChainConfigError);
  CHECK_THROWS_AS(pseudo_marginal_mh(fine, [](double) { return kNegInf; }, GaussianWalk{}, 0.0,
                                     PseudoMarginalConfig{}),
                  ChainConfigError);
  CHECK_THROWS_AS(pseudo_marginal_mh(fine, flat, GaussianWalk{}, 0.0, PseudoMarginalConfig{10, 0, 0.1, 0}),
                  std::invalid_argument);
  auto seeded = [](double, const std::vector<Seed>&) { return 0.0; };
  CHECK_THROWS_AS(block_pseudo_marginal_mh(seeded, flat, GaussianWalk{}, 0.0,
                                           BlockPseudoMarginalConfig{10, 4, 5, 0.1, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(block_pseudo_marginal_mh(seeded, flat, GaussianWalk{}, 0.0,
                                           BlockPseudoMarginalConfig{10, 4, 0, 0.1, 0}),
                  std::invalid_argument);
}

TEST_CASE("non-finite estimates are rejected and counted") {
  auto estimate = [](double x, std::size_t, Rng&) { return x > 1.0 ? kNegInf : 0.0; };
  const auto s = pseudo_marginal_mh(estimate, [](double) { return 0.0; }, GaussianWalk{1.0}, 0.0,
                                    PseudoMarginalConfig{2000, 1, 0.0, 6});
  CHECK(s.nonfinite_rejections > 0);
  for (double v : s.values) CHECK(v <= 1.0);
}

TEST_CASE("sample summaries") {
  PosteriorSamples s;
  s.values = {4, 1, 3, 2, 5};
  CHECK(s.mean() == 3.0);
  CHECK(s.variance() == 2.5);
  CHECK(s.quantile(0.0) == 1.0);
  CHECK(s.quantile(0.5) == 3.0);
  CHECK(s.quantile(1.0) == 5.0);
  CHECK(s.quantile(0.125) == 1.5);
  CHECK(s.thinned(2).values == std::vector<double>{1, 2});
  CHECK_THROWS_AS(s.thinned(6), std::invalid_argument);
  std::ostringstream out;
  write_csv(out, s.thinned(2), "theta");
  CHECK(out.str() == "index,theta\n0,1\n1,2\n");
}

TEST_CASE("format_double round-trips") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5}) CHECK(std::stod(format_double(x)) == x);
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(3.0) == "3");
}

TEST_CASE("MH on a uniform two-point target") {
  const auto s = mh_chain([](bool) { return 0.0; }, FlipProposal{}, false, ChainConfig{10000, 0.1, 4});
  CHECK(s.mean() >= 0.48);
  CHECK(s.mean() <= 0.52);
}

}
