// Tests for the exact-moment oracles and the worst-case risk-rate shapes.
//
// The enumeration oracle is itself an oracle for other suites, so it gets
// the strongest scrutiny here: it must agree with an independent Monte
// Carlo estimate (within sampling error), with the separable per-bin
// expectation for the smoothed plug-in, with the constant stub, and with
// itself across serial and parallel execution bit for bit.

#include "doctest.h"

#include <omp.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "divrate/distribution.hpp"
#include "divrate/error.hpp"
#include "divrate/estimators.hpp"
#include "divrate/histogram.hpp"
#include "divrate/oracle.hpp"
#include "divrate/rng.hpp"
#include "divrate/sampling.hpp"

using divrate::BoundedRatioPair;
using divrate::EstimatorConfig;
using divrate::OracleEstimator;
using divrate::OracleSampling;

namespace {

BoundedRatioPair small_pair() {
  divrate::DiscreteDistribution p(std::vector<double>{0.3, 0.7});
  divrate::DiscreteDistribution q(std::vector<double>{0.6, 0.4});
  return BoundedRatioPair(p, q, 1.75);
}

// Monte Carlo estimate of the conditional-on-finite mean, the second
// moment, and the infinite-sentinel probability, mirroring the sampling
// model the enumeration oracle integrates over.
struct McMoments {
  double mean = 0.0;
  double second = 0.0;
  double p_inf = 0.0;
  std::int64_t finite = 0;
  std::int64_t trials = 0;
};

template <typename Eval>
McMoments mc_moments(const BoundedRatioPair& pair, std::int64_t m,
                     std::int64_t n, OracleSampling sampling,
                     std::int64_t trials, Eval eval) {
  McMoments out;
  out.trials = trials;
  long double s1 = 0.0L, s2 = 0.0L;
  for (std::int64_t t = 0; t < trials; ++t) {
    divrate::Xoshiro256ss rng(divrate::mix64(0xABCDEFu, static_cast<std::uint64_t>(t)));
    divrate::SampleHistogram M =
        sampling == OracleSampling::multinomial
            ? divrate::sample_histogram(rng, pair.p(), m)
            : divrate::sample_poissonized(rng, pair.p(), m);
    divrate::SampleHistogram N =
        sampling == OracleSampling::multinomial
            ? divrate::sample_histogram(rng, pair.q(), n)
            : divrate::sample_poissonized(rng, pair.q(), n);
    double v = eval(M, N);
    if (std::isinf(v)) continue;
    s1 += v;
    s2 += static_cast<long double>(v) * v;
    ++out.finite;
  }
  out.mean = static_cast<double>(s1 / out.finite);
  out.second = static_cast<double>(s2 / out.finite);
  out.p_inf = 1.0 - static_cast<double>(out.finite) /
                        static_cast<double>(trials);
  return out;
}

// Evaluation conventions shared with the oracle: empty estimation sample
// means 0; a P-supported bin with zero Q-count is the infinite sentinel.
double eval_plugin(const divrate::SampleHistogram& M,
                   const divrate::SampleHistogram& N) {
  if (M.total() == 0) return 0.0;
  if (N.total() == 0) {
    for (auto c : M.counts())
      if (c > 0) return std::numeric_limits<double>::infinity();
    return 0.0;
  }
  for (std::size_t i = 0; i < M.counts().size(); ++i)
    if (M.counts()[i] > 0 && N.counts()[i] == 0)
      return std::numeric_limits<double>::infinity();
  return divrate::plugin_kl(M, N);
}

} // namespace

TEST_CASE("risk-rate formulas give the hand-computed values") {
  // k = 100, m = 1000, n = 10000, f = 10.
  auto ra = divrate::rate_aplugin(100.0, 1000.0, 10000.0, 10.0);
  // bias: (k f / n + k / m)^2 = (0.1 + 0.1)^2 = 0.04
  CHECK(ra.bias_sq_term == doctest::Approx(0.04).epsilon(1e-14));
  double l10 = std::log(10.0);
  CHECK(ra.variance_m_term == doctest::Approx(l10 * l10 / 1000.0).epsilon(1e-14));
  CHECK(ra.variance_n_term == doctest::Approx(0.001).epsilon(1e-14));
  CHECK(ra.total == doctest::Approx(0.04 + l10 * l10 / 1000.0 + 0.001)
                        .epsilon(1e-14));
  CHECK(ra.total == doctest::Approx(0.046301898110478398).epsilon(1e-12));
  CHECK(ra.kind == divrate::RiskRate::Kind::aplugin_rate);

  auto rm = divrate::rate_minimax(100.0, 1000.0, 10000.0, 10.0);
  double lk = std::log(100.0);
  double bias = std::pow(100.0 / (1000.0 * lk) + 1000.0 / (10000.0 * lk), 2.0);
  CHECK(rm.bias_sq_term == doctest::Approx(bias).epsilon(1e-13));
  CHECK(rm.variance_m_term == doctest::Approx(ra.variance_m_term).epsilon(1e-15));
  CHECK(rm.variance_n_term == doctest::Approx(ra.variance_n_term).epsilon(1e-15));
  CHECK(rm.total == doctest::Approx(bias + l10 * l10 / 1000.0 + 0.001)
                        .epsilon(1e-13));
  CHECK(rm.kind == divrate::RiskRate::Kind::minimax_rate);

  // The minimax squared-bias equals the plug-in squared-bias with both
  // sample budgets inflated by log k.
  auto scaled = divrate::rate_aplugin(100.0, 1000.0 * lk, 10000.0 * lk, 10.0);
  CHECK(rm.bias_sq_term == doctest::Approx(scaled.bias_sq_term).epsilon(1e-12));

  // The log-k advantage shows up as a much smaller total here.
  CHECK(rm.total < 0.25 * ra.total);
}

TEST_CASE("risk-rate formulas reject out-of-domain parameters") {
  CHECK_THROWS_AS(divrate::rate_aplugin(10.0, 100.0, 100.0, 0.5),
                  divrate::invalid_parameter); // f < 1
  CHECK_THROWS_AS(divrate::rate_aplugin(0.0, 100.0, 100.0, 5.0),
                  divrate::invalid_parameter);
  CHECK_THROWS_AS(divrate::rate_minimax(1.0, 100.0, 100.0, 5.0),
                  divrate::invalid_parameter); // k = 1 has log k = 0
  CHECK_NOTHROW(divrate::rate_minimax(2.0, 100.0, 100.0, 1.0));
}

TEST_CASE("risk rates scale the documented way in each variable") {
  // Quadrupling m divides the m-variance term by 4 and shrinks bias.
  auto r1 = divrate::rate_aplugin(50.0, 500.0, 5000.0, 8.0);
  auto r2 = divrate::rate_aplugin(50.0, 2000.0, 5000.0, 8.0);
  CHECK(r2.variance_m_term == doctest::Approx(r1.variance_m_term / 4.0)
                                  .epsilon(1e-14));
  CHECK(r2.bias_sq_term < r1.bias_sq_term);
  CHECK(r2.total < r1.total);
  // The rates are monotone increasing in f.
  auto rf = divrate::rate_aplugin(50.0, 500.0, 5000.0, 16.0);
  CHECK(rf.total > r1.total);
}

TEST_CASE("constant stub integrates to the true divergence with zero variance") {
  auto pair = small_pair();
  EstimatorConfig cfg;
  double d = divrate::kl_divergence(pair.p(), pair.q());
  for (auto sampling :
       {OracleSampling::multinomial, OracleSampling::poissonized}) {
    auto mom = divrate::exact_estimator_moments(
        pair, 4, 4, OracleEstimator::true_divergence_stub, cfg, sampling);
    CAPTURE(static_cast<int>(sampling));
    CHECK(mom.expectation == doctest::Approx(d).epsilon(1e-12));
    CHECK(mom.variance() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mom.infinite_probability == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(mom.truncation_mass_dropped < 1e-12);
  }
}

TEST_CASE("plug-in moments: exact enumeration vs hand formula for the sentinel") {
  // k = 2, multinomial m = n = 4 over P = (.3,.7), Q = (.6,.4).
  // P(inf) = P(M1>0, N1=0) + P(M2>0, N2=0) - P(both), with
  // N1=0 <=> N=(0,4), N2=0 <=> N=(4,0); M cannot have both bins positive
  // in the excluded event... compute directly:
  //   P(N1=0) = 0.4^4, P(N2=0) = 0.6^4,
  //   P(M1>0) = 1 - 0.7^4, P(M2>0) = 1 - 0.3^4,
  //   P(inf) = P(M1>0)P(N1=0) + P(M2>0)P(N2=0)
  //          - P(M1>0 and M2>0) * 0   [N1=0 and N2=0 impossible for n=4]
  auto pair = small_pair();
  EstimatorConfig cfg;
  auto mom = divrate::exact_estimator_moments(
      pair, 4, 4, OracleEstimator::plugin, cfg, OracleSampling::multinomial);
  double p_inf = (1.0 - std::pow(0.7, 4)) * std::pow(0.4, 4) +
                 (1.0 - std::pow(0.3, 4)) * std::pow(0.6, 4);
  CHECK(mom.infinite_probability == doctest::Approx(p_inf).epsilon(1e-12));
  CHECK(mom.truncation_mass_dropped == 0.0); // multinomial enumerates fully
  CHECK(std::isfinite(mom.expectation));
  CHECK(mom.variance() >= 0.0);
}

TEST_CASE("enumeration oracle agrees with Monte Carlo for every estimator") {
  auto pair = small_pair();
  EstimatorConfig cfg;
  const std::int64_t m = 4, n = 4, trials = 60000;

  for (auto sampling :
       {OracleSampling::multinomial, OracleSampling::poissonized}) {
    CAPTURE(static_cast<int>(sampling));

    // plug-in (has an infinite-sentinel event)
    {
      auto ex = divrate::exact_estimator_moments(
          pair, m, n, OracleEstimator::plugin, cfg, sampling);
      auto mc = mc_moments(pair, m, n, sampling, trials, eval_plugin);
      double se_mean = std::sqrt(ex.variance() / static_cast<double>(mc.finite));
      CHECK(std::abs(mc.mean - ex.expectation) < 4.0 * se_mean + 1e-12);
      double se_p = std::sqrt(ex.infinite_probability *
                              (1.0 - ex.infinite_probability) /
                              static_cast<double>(trials));
      CHECK(std::abs(mc.p_inf - ex.infinite_probability) < 4.0 * se_p + 1e-12);
    }

    // smoothed plug-in (always finite)
    {
      auto ex = divrate::exact_estimator_moments(
          pair, m, n, OracleEstimator::aplugin, cfg, sampling);
      auto mc = mc_moments(pair, m, n, sampling, trials,
                           [&](const divrate::SampleHistogram& M,
                               const divrate::SampleHistogram& N) {
                             if (M.total() == 0) return 0.0;
                             return divrate::aplugin_kl(M, N, cfg);
                           });
      CHECK(ex.infinite_probability == 0.0);
      double se_mean = std::sqrt(ex.variance() / static_cast<double>(trials));
      CHECK(std::abs(mc.mean - ex.expectation) < 4.0 * se_mean + 1e-12);
      double se2 = std::sqrt((mc.second * mc.second + 1.0) /
                             static_cast<double>(trials));
      CHECK(std::abs(mc.second - ex.second_moment) < 5.0 * se2 + 1e-6);
    }
  }

  // two-part estimator under the multinomial-reuse protocol
  {
    auto ex = divrate::exact_estimator_moments(
        pair, m, n, OracleEstimator::opt, cfg, OracleSampling::multinomial);
    auto mc = mc_moments(pair, m, n, OracleSampling::multinomial, trials,
                         [&](const divrate::SampleHistogram& M,
                             const divrate::SampleHistogram& N) {
                           divrate::SplitSamples ms(
                               M, M, divrate::SplitMode::multinomial_reuse);
                           divrate::SplitSamples ns(
                               N, N, divrate::SplitMode::multinomial_reuse);
                           return divrate::opt_kl(ms, ns, cfg, 2, m, n).value;
                         });
    double se_mean = std::sqrt(ex.variance() / static_cast<double>(trials));
    CHECK(std::abs(mc.mean - ex.expectation) < 4.0 * se_mean + 1e-12);
  }
}

TEST_CASE("opt under poissonization needs the 4-fold product and says so") {
  // With independent selection histograms the outcome space is the product
  // of 4k truncated Poisson supports; each support carries >= 15 counts to
  // reach tail mass < 1e-14, so even k = 2, m = n = 3 is ~1e10 outcomes.
  // The oracle must refuse rather than silently truncate harder.
  auto pair = small_pair();
  EstimatorConfig cfg;
  CHECK_THROWS_AS(divrate::exact_estimator_moments(
                      pair, 3, 3, OracleEstimator::opt, cfg,
                      OracleSampling::poissonized),
                  divrate::enumeration_too_large);
}

TEST_CASE("oracle results are identical across serial and parallel execution") {
  auto pair = divrate::make_worst_case_pair_bias_II(3, 30, 4.0);
  EstimatorConfig cfg;
  int saved = omp_get_max_threads();
  omp_set_num_threads(2);
  for (auto est : {OracleEstimator::plugin, OracleEstimator::aplugin,
                   OracleEstimator::opt}) {
    CAPTURE(static_cast<int>(est));
    auto serial = divrate::exact_estimator_moments(
        pair, 10, 12, est, cfg, OracleSampling::multinomial, false);
    auto parallel = divrate::exact_estimator_moments(
        pair, 10, 12, est, cfg, OracleSampling::multinomial, true);
    CHECK(serial.expectation == parallel.expectation);
    CHECK(serial.second_moment == parallel.second_moment);
    CHECK(serial.infinite_probability == parallel.infinite_probability);
  }
  omp_set_num_threads(saved);
}

TEST_CASE("poissonized enumeration truncates a provably tiny tail") {
  auto pair = small_pair();
  EstimatorConfig cfg;
  auto mom = divrate::exact_estimator_moments(
      pair, 6, 6, OracleEstimator::aplugin, cfg, OracleSampling::poissonized);
  CHECK(mom.truncation_mass_dropped >= 0.0);
  CHECK(mom.truncation_mass_dropped < 1e-12);
  // Total enumerated mass must be essentially 1 (always-finite estimator).
  CHECK(mom.infinite_probability == 0.0);
}

TEST_CASE("oversized outcome spaces are rejected with the count") {
  auto pair = BoundedRatioPair(divrate::make_uniform(50),
                               divrate::make_uniform(50), 1.0);
  EstimatorConfig cfg;
  CHECK_THROWS_AS(divrate::exact_estimator_moments(
                      pair, 100, 100, OracleEstimator::aplugin, cfg,
                      OracleSampling::multinomial),
                  divrate::enumeration_too_large);
  CHECK_THROWS_AS(divrate::exact_estimator_moments(
                      pair, 100, 100, OracleEstimator::aplugin, cfg,
                      OracleSampling::poissonized),
                  divrate::enumeration_too_large);
}

TEST_CASE("separable expectation matches the joint enumeration") {
  auto pair = divrate::make_worst_case_pair_bias_II(3, 5, 2.0);
  EstimatorConfig cfg;
  auto joint = divrate::exact_estimator_moments(
      pair, 4, 5, OracleEstimator::aplugin, cfg, OracleSampling::multinomial);
  double sep = divrate::exact_aplugin_expectation(
      pair, 4, 5, cfg, OracleSampling::multinomial);
  CHECK(sep == doctest::Approx(joint.expectation).epsilon(1e-12));

  // It is also fast enough for budgets far beyond the joint guard.
  auto big = divrate::make_worst_case_pair_bias_I(100, 10.0);
  CHECK(std::isfinite(divrate::exact_aplugin_expectation(
      big, 2000, 2000, cfg, OracleSampling::multinomial)));

  // Poissonization breaks the separability argument and is rejected.
  CHECK_THROWS_AS(divrate::exact_aplugin_expectation(
                      pair, 4, 5, cfg, OracleSampling::poissonized),
                  divrate::invalid_parameter);
}

TEST_CASE("factorial-moment expectation oracle: basics and domain") {
  divrate::FactorialCoeffs one;
  one.weights = {1.0};
  one.offset = 0.0;
  one.first_order = 0;
  // est == 1 integrates to 1 for any Poisson rate.
  CHECK(divrate::exact_gl_expectation(one, 0.37, 100.0) ==
        doctest::Approx(1.0).epsilon(1e-12));

  divrate::FactorialCoeffs lin;
  lin.weights = {1.0};
  lin.offset = 0.0;
  lin.first_order = 1;
  // E[(N)_1] = lambda = n q.
  CHECK(divrate::exact_gl_expectation(lin, 0.5, 10.0) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK(divrate::exact_gl_expectation(lin, 1.0, 123.0) ==
        doctest::Approx(123.0).epsilon(1e-11));

  CHECK_THROWS_AS(divrate::exact_gl_expectation(lin, 0.0, 10.0),
                  divrate::invalid_parameter);
  CHECK_THROWS_AS(divrate::exact_gl_expectation(lin, 1.5, 10.0),
                  divrate::invalid_parameter);
  CHECK_THROWS_AS(divrate::exact_gl_expectation(lin, 0.5, 1e5),
                  divrate::invalid_parameter); // n q over the support cap
}
