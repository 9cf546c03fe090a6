#pragma once

#include <cstdint>

#include "divrate/distribution.hpp"
#include "divrate/histogram.hpp"
#include "divrate/rng.hpp"

namespace divrate {

/// Binomial(n, p) draw. Inversion by sequential search for small n*p,
/// the BTRS transformed-rejection sampler for large n*p. Exact for the
/// boundary cases p = 0 and p = 1.
std::int64_t binomial_draw(Xoshiro256ss& rng, std::int64_t n, double p);

/// Poisson(lambda) draw. CDF-walk inversion for lambda < 30, the PTRS
/// transformed-rejection sampler for lambda >= 30. lambda = 0 returns 0.
std::int64_t poisson_draw(Xoshiro256ss& rng, double lambda);

/// Multinomial(n, p) histogram via k-1 sequential conditional binomials.
SampleHistogram sample_histogram(Xoshiro256ss& rng,
                                 const DiscreteDistribution& p,
                                 std::int64_t n);

/// Poissonized histogram: counts_i ~ Poisson(n * p_i), independent bins.
SampleHistogram sample_poissonized(Xoshiro256ss& rng,
                                   const DiscreteDistribution& p,
                                   std::int64_t n);

/// Builds the two-histogram input an estimator consumes.
///
/// multinomial_reuse: one multinomial histogram of size n, used as both the
/// estimation and the selection histogram (the fixed-sample-size protocol
/// of the experiments).
///
/// poissonized_split: two independent poissonized histograms, each with
/// mean budget n, so every per-bin count pair (estimation, selection) is
/// independent (the protocol the two-stage estimator is analysed under).
SplitSamples make_split(Xoshiro256ss& rng, const DiscreteDistribution& p,
                        std::int64_t n, SplitMode mode);

// Seed-taking forms: construct a fresh generator from the seed and draw.
SampleHistogram sample_histogram(const DiscreteDistribution& p,
                                 std::int64_t sample_size,
                                 std::uint64_t rng_seed);
SampleHistogram sample_poissonized(const DiscreteDistribution& p,
                                   std::int64_t mean_size,
                                   std::uint64_t rng_seed);
SplitSamples make_split(const DiscreteDistribution& p, std::int64_t mean_size,
                        SplitMode mode, std::uint64_t rng_seed);

} // namespace divrate
