#include "divrate/sampling.hpp"

#include <cmath>

namespace divrate {
namespace {

// Sequential CDF inversion; used when the mean n*p is small (p <= 1/2 here,
// so the start probability (1-p)^n >= e^{-2np} cannot underflow).
std::int64_t binomial_inversion(Xoshiro256ss& rng, std::int64_t n, double p) {
  double odds = p / (1.0 - p);
  double pmf = std::exp(static_cast<double>(n) * std::log1p(-p));
  double cdf = pmf;
  double u = rng.next_double();
  std::int64_t x = 0;
  while (u > cdf && x < n) {
    ++x;
    pmf *= odds * static_cast<double>(n - x + 1) / static_cast<double>(x);
    cdf += pmf;
  }
  return x;
}

// BTRS transformed-rejection sampler (Hormann 1993), valid for p <= 1/2
// with n*p large; constants follow the published algorithm.
std::int64_t binomial_btrs(Xoshiro256ss& rng, std::int64_t n, double p) {
  const double nd = static_cast<double>(n);
  const double spq = std::sqrt(nd * p * (1.0 - p));
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nd * p + 0.5;
  const double vr = 0.92 - 4.2 / b;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / (1.0 - p));
  const double mode = std::floor((nd + 1.0) * p);
  const double h = std::lgamma(mode + 1.0) + std::lgamma(nd - mode + 1.0);
  for (;;) {
    double u = rng.next_double() - 0.5;
    double v = rng.next_double();
    double us = 0.5 - std::abs(u);
    double kd = std::floor((2.0 * a / us + b) * u + c);
    if (kd < 0.0 || kd > nd) continue;
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kd);
    v = std::log(v * alpha / (a / (us * us) + b));
    if (v <= h - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0) +
                 (kd - mode) * lpq)
      return static_cast<std::int64_t>(kd);
  }
}

// Sequential CDF inversion for Poisson; e^{-lambda} stays representable for
// the lambda < 30 range this is used in.
std::int64_t poisson_inversion(Xoshiro256ss& rng, double lambda) {
  double pmf = std::exp(-lambda);
  double cdf = pmf;
  double u = rng.next_double();
  std::int64_t x = 0;
  // The cap bounds the walk when u lands in the far tail's rounding gap.
  const std::int64_t cap = 30 + static_cast<std::int64_t>(20.0 * lambda);
  while (u > cdf && x < cap) {
    ++x;
    pmf *= lambda / static_cast<double>(x);
    cdf += pmf;
  }
  return x;
}

// PTRS transformed-rejection sampler (Hormann 1993) for lambda >= 30.
std::int64_t poisson_ptrs(Xoshiro256ss& rng, double lambda) {
  const double loglam = std::log(lambda);
  const double b = 0.931 + 2.53 * std::sqrt(lambda);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = rng.next_double() - 0.5;
    double v = rng.next_double();
    double us = 0.5 - std::abs(u);
    double kd = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::int64_t>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        kd * loglam - lambda - std::lgamma(kd + 1.0))
      return static_cast<std::int64_t>(kd);
  }
}

} // namespace

std::int64_t binomial_draw(Xoshiro256ss& rng, std::int64_t n, double p) {
  if (n < 0) throw invalid_parameter("binomial_draw: n must be >= 0");
  if (!(p >= 0.0) || !(p <= 1.0))
    throw invalid_parameter("binomial_draw: p must lie in [0, 1]");
  if (n == 0 || p == 0.0) return 0;
  if (p == 1.0) return n;
  if (p > 0.5) return n - binomial_draw(rng, n, 1.0 - p);
  if (static_cast<double>(n) * p <= 30.0) return binomial_inversion(rng, n, p);
  return binomial_btrs(rng, n, p);
}

std::int64_t poisson_draw(Xoshiro256ss& rng, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw invalid_parameter("poisson_draw: lambda must be finite and >= 0");
  if (lambda == 0.0) return 0;
  if (lambda < 30.0) return poisson_inversion(rng, lambda);
  return poisson_ptrs(rng, lambda);
}

SampleHistogram sample_histogram(Xoshiro256ss& rng,
                                 const DiscreteDistribution& p,
                                 std::int64_t n) {
  if (n < 0) throw invalid_parameter("sample_histogram: sample size >= 0");
  std::size_t k = static_cast<std::size_t>(p.size());
  std::vector<std::int64_t> counts(k, 0);
  std::int64_t remaining = n;
  double mass_left = 1.0;
  for (std::size_t i = 0; i + 1 < k && remaining > 0; ++i) {
    double pi = p[i];
    double ratio = mass_left <= pi ? 1.0 : pi / mass_left;
    counts[i] = binomial_draw(rng, remaining, ratio);
    remaining -= counts[i];
    mass_left -= pi;
  }
  counts[k - 1] = remaining;
  return SampleHistogram(std::move(counts));
}

SampleHistogram sample_poissonized(Xoshiro256ss& rng,
                                   const DiscreteDistribution& p,
                                   std::int64_t n) {
  if (n < 0) throw invalid_parameter("sample_poissonized: mean size >= 0");
  std::size_t k = static_cast<std::size_t>(p.size());
  std::vector<std::int64_t> counts(k, 0);
  for (std::size_t i = 0; i < k; ++i)
    counts[i] = poisson_draw(rng, static_cast<double>(n) * p[i]);
  return SampleHistogram(std::move(counts));
}

SplitSamples make_split(Xoshiro256ss& rng, const DiscreteDistribution& p,
                        std::int64_t n, SplitMode mode) {
  if (mode == SplitMode::multinomial_reuse) {
    SampleHistogram h = sample_histogram(rng, p, n);
    SampleHistogram copy = h;
    return SplitSamples(std::move(h), std::move(copy), mode);
  }
  SampleHistogram est = sample_poissonized(rng, p, n);
  SampleHistogram sel = sample_poissonized(rng, p, n);
  return SplitSamples(std::move(est), std::move(sel), mode);
}

SampleHistogram sample_histogram(const DiscreteDistribution& p,
                                 std::int64_t sample_size,
                                 std::uint64_t rng_seed) {
  Xoshiro256ss rng(rng_seed);
  return sample_histogram(rng, p, sample_size);
}

SampleHistogram sample_poissonized(const DiscreteDistribution& p,
                                   std::int64_t mean_size,
                                   std::uint64_t rng_seed) {
  Xoshiro256ss rng(rng_seed);
  return sample_poissonized(rng, p, mean_size);
}

SplitSamples make_split(const DiscreteDistribution& p, std::int64_t mean_size,
                        SplitMode mode, std::uint64_t rng_seed) {
  Xoshiro256ss rng(rng_seed);
  return make_split(rng, p, mean_size, mode);
}

} // namespace divrate
