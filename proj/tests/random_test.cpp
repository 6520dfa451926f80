#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>
#include <vector>

#include "prefplan/random.hpp"

using namespace prefplan;

TEST_SUITE("random") {

TEST_CASE("engine matches the standard mt19937_64 sequence") {
  // The standard fixes the 10000th output for the default seed.
  Rng rng(5489);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.next_u64();
  CHECK(x == 9981545732273789042ULL);
}

TEST_CASE("mix64 is the SplitMix64 finalizer") {
  // First SplitMix64 outputs for state 0 and state 1.
  CHECK(mix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(mix64(0x9e3779b97f4a7c15ULL) == 0x6e789e6aa1b965f4ULL);
}

TEST_CASE("uniform takes the top 53 bits") {
  Rng rng(7);
  std::mt19937_64 ref(7);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u == static_cast<double>(ref() >> 11) * 0x1.0p-53);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal is Box-Muller over consecutive uniforms") {
  Rng rng(11);
  std::mt19937_64 ref(11);
  for (int i = 0; i < 100; ++i) {
    const double u1 = static_cast<double>(ref() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(ref() >> 11) * 0x1.0p-53;
    REQUIRE(u1 > 0.0);
    const double r = std::sqrt(-2.0 * std::log(u1));
    CHECK(rng.normal() == doctest::Approx(r * std::cos(2 * std::numbers::pi * u2)).epsilon(1e-15));
    CHECK(rng.normal() == doctest::Approx(r * std::sin(2 * std::numbers::pi * u2)).epsilon(1e-15));
  }
}

TEST_CASE("same seed, same stream") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.normal() == b.normal());
    CHECK(a.uniform_index(13) == b.uniform_index(13));
  }
  Rng c(43);
  Rng d(42);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("derive_seed separates streams") {
  std::set<Seed> seen;
  for (std::uint64_t parent = 0; parent < 20; ++parent)
    for (std::uint64_t s = 0; s < 50; ++s) seen.insert(derive_seed(parent, {s}));
  CHECK(seen.size() == 1000);
  CHECK(derive_seed(3, {1, 2}) != derive_seed(3, {2, 1}));
  CHECK(derive_seed(3, {1, 2}) == derive_seed(3, {1, 2}));
  CHECK(derive_seed(3, {}) != derive_seed(3, {0}));
  CHECK(Rng(9).split(4).seed() == derive_seed(9, {4}));
}

TEST_CASE("uniform_index is uniform") {
  Rng rng(3);
  constexpr int n = 7, draws = 70000;
  std::array<int, n> counts{};
  for (int i = 0; i < draws; ++i) ++counts[rng.uniform_index(n)];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - draws / n) * (c - draws / n) / double(draws / n);
  // 6 degrees of freedom; 22.46 is the 0.999 quantile.
  CHECK(chi2 < 22.46);
  CHECK_THROWS_AS(rng.uniform_index(0), std::invalid_argument);
}

TEST_CASE("categorical follows the weights") {
  Rng rng(5);
  const std::vector<double> w{1, 0, 2, 3, 4};
  std::array<int, 5> counts{};
  constexpr int draws = 100000;
  for (int i = 0; i < draws; ++i) ++counts[rng.categorical(w)];
  CHECK(counts[1] == 0);
  double chi2 = 0.0;
  for (int i : {0, 2, 3, 4}) {
    const double expected = draws * w[i] / 10.0;
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  // 3 degrees of freedom; 16.27 is the 0.999 quantile.
  CHECK(chi2 < 16.27);
  CHECK_THROWS_AS(rng.categorical(std::vector<double>{0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(rng.categorical(std::vector<double>{1, -1}), std::invalid_argument);
}

TEST_CASE("normal moments") {
  Rng rng(8);
  constexpr int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    ss += z * z;
  }
  CHECK(std::abs(s / n) < 4.0 / std::sqrt(double(n)));
  CHECK(ss / n == doctest::Approx(1.0).epsilon(0.02));
}

}
