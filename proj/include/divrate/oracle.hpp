#pragma once

#include <cstdint>

#include "divrate/approx.hpp"
#include "divrate/distribution.hpp"
#include "divrate/estimators.hpp"

namespace divrate {

/// Evaluable form of the worst-case risk-rate expressions with all hidden
/// constants set to 1; useful only for scaling-shape checks, never for
/// absolute-level claims.
struct RiskRate {
  enum class Kind { aplugin_rate, minimax_rate };
  double bias_sq_term = 0.0;
  double variance_m_term = 0.0; // log^2 f / m
  double variance_n_term = 0.0; // f / n
  double total = 0.0;           // sum of the three terms
  Kind kind = Kind::aplugin_rate;
};

/// Exact (up to stated truncation) moments of an estimator over the full
/// sampling distribution of the histograms.
struct ExactMoments {
  double expectation = 0.0;
  double second_moment = 0.0;
  /// Probability mass not enumerated (Poisson tail truncation); < 1e-12.
  double truncation_mass_dropped = 0.0;
  /// Probability that the estimator returns the infinite sentinel (plug-in
  /// only; 0 for the always-finite estimators). Moments are conditional on
  /// the finite event when this is positive.
  double infinite_probability = 0.0;

  double variance() const { return second_moment - expectation * expectation; }
};

/// Which estimator the enumeration oracle evaluates. true_divergence_stub
/// is the constant D(P||Q) used to validate the oracle itself.
enum class OracleEstimator { plugin, aplugin, opt, true_divergence_stub };

/// How the oracle models the sampling of histograms.
enum class OracleSampling { multinomial, poissonized };

/// (k f / n + k / m)^2 + log^2(f)/m + f/n  — augmented plug-in worst-case
/// rate shape.
RiskRate rate_aplugin(double k, double m, double n, double f);

/// (k/(m log k) + k f/(n log k))^2 + log^2(f)/m + f/n — minimax rate shape.
/// Requires k >= 2 so log k > 0.
RiskRate rate_minimax(double k, double m, double n, double f);

/// Exact estimator moments by enumeration of the full outcome space.
///
/// multinomial: M and N enumerate all compositions of m and n into k bins
/// (joint feasibility guard: C(m+k-1, k-1) * C(n+k-1, k-1) <= 1e7, else
/// enumeration_too_large carrying the count). The opt estimator reuses
/// each histogram for branch selection, matching the fixed-sample protocol.
///
/// poissonized: every bin's count enumerates a truncated Poisson support
/// (per-bin tail mass < 1e-14); the same product-size guard applies. The
/// opt estimator draws independent selection histograms, so its outcome
/// space is the 4-fold product.
ExactMoments exact_estimator_moments(const BoundedRatioPair& pair,
                                     std::int64_t m, std::int64_t n,
                                     OracleEstimator estimator,
                                     const EstimatorConfig& config,
                                     OracleSampling sampling,
                                     bool parallel = true);

/// Exact expectation of the augmented plug-in estimator, computed from the
/// per-bin marginal count distributions instead of the joint outcome space.
/// Valid because the estimator is a sum of per-bin terms, each a product of
/// a function of M_i and a function of N_i, and the two samples are
/// independent — so only Binomial marginals enter. Requires multinomial
/// sampling (the estimator normalizes by empirical totals, which are only
/// constant there); poissonized requests throw invalid_parameter.
/// Cost O(k (m + n)); reaches instances far beyond the joint-enumeration
/// guard. Returns the expectation; bias = expectation - kl_divergence(pair).
double exact_aplugin_expectation(const BoundedRatioPair& pair, std::int64_t m,
                                 std::int64_t n, const EstimatorConfig& config,
                                 OracleSampling sampling);

/// Expectation of a factorial-moment estimator under a Poisson count with
/// mean rate * probability: sum_c Poi(rate * probability, c) * est(c),
/// truncated at tail mass < 1e-14. For the cross-side g coefficients this
/// must equal mu(q)/q analytically; the generic form also serves the
/// entropy-side g' (expectation equals the transported mu at p).
double exact_gl_expectation(const FactorialCoeffs& fc, double q, double n);

} // namespace divrate
