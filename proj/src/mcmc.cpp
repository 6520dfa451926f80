#include "prefplan/mcmc.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace prefplan {

double PosteriorSamples::mean() const {
  if (values.empty()) throw std::logic_error("PosteriorSamples: no samples");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double PosteriorSamples::variance() const {
  const double m = mean();
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return values.size() > 1 ? ss / static_cast<double>(values.size() - 1) : 0.0;
}

double PosteriorSamples::quantile(double p) const {
  if (values.empty()) throw std::logic_error("PosteriorSamples: no samples");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside [0, 1]");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PosteriorSamples PosteriorSamples::thinned(std::size_t count) const {
  if (count == 0 || count > values.size())
    throw std::invalid_argument("thinned: count must be in [1, number of samples]");
  PosteriorSamples out = *this;
  out.values.clear();
  const std::size_t stride = values.size() / count;
  // Take the last sample of each stride so the earliest samples go first.
  for (std::size_t i = 0; i < count; ++i) out.values.push_back(values[(i + 1) * stride - 1]);
  return out;
}

std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf.data(), end);
}

void write_csv(std::ostream& out, const PosteriorSamples& samples, const std::string& value_column) {
  out << "index," << value_column << '\n';
  for (std::size_t i = 0; i < samples.values.size(); ++i)
    out << i << ',' << format_double(samples.values[i]) << '\n';
}

}  // namespace prefplan
