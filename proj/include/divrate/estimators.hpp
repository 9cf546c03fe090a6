#pragma once

#include <cstdint>
#include <optional>

#include "divrate/approx.hpp"
#include "divrate/histogram.hpp"

namespace divrate {

/// Tuning constants for the estimators. Defaults follow the experimental
/// protocol: c0 = 1.2, c2 = 0.1, c1 = 2 c2, add-constant c = 1, primed
/// (entropy-side) constants mirroring the unprimed ones, no clipping,
/// one multinomial sample reused for selection and estimation.
struct EstimatorConfig {
  double add_constant_c = 1.0; // augmented plug-in smoothing constant
  double c0 = 1.2;             // polynomial degree: L = max(floor(c0 ln k), 1)
  double c1 = 0.2;             // approximation interval: a = c1 ln k / n
  double c2 = 0.1;             // branch threshold: poly iff N' <= c2 ln k
  double c0_prime = 1.2;       // entropy-side counterparts
  double c1_prime = 0.2;
  double c2_prime = 0.1;
  std::optional<double> clip_bound_f; // if set, clip to [0, ln f]
  SplitMode split_mode = SplitMode::multinomial_reuse;

  void validate() const; // throws invalid_parameter on violation
};

/// Per-side tally of which branch each bin took.
struct BranchCounts {
  std::int64_t poly_branch = 0;
  std::int64_t plugin_branch = 0;
};

/// Result of the two-part minimax estimator.
struct DivergenceEstimate {
  double value = 0.0;     // final estimate (post-clipping when enabled)
  double d1_part = 0.0;   // estimate of sum P_i log P_i
  double d2_part = 0.0;   // estimate of sum P_i log Q_i
  bool clipped = false;   // true when clipping changed the raw difference
  BranchCounts entropy_side; // branches taken inside d1_part
  BranchCounts cross_side;   // branches taken inside d2_part
};

/// Value plus branch tally of one side of the two-part estimator.
struct PartEstimate {
  double value = 0.0;
  BranchCounts branches;
};

/// Empirical divergence D(P_hat || Q_hat) with 0 log 0 = 0; returns
/// +infinity when some bin has M_i > 0 and N_i = 0.
double plugin_kl(const SampleHistogram& M, const SampleHistogram& N);

/// Augmented plug-in estimator: Q-side counts smoothed by the add-constant
/// c and renormalized by n + k c, which makes the value always finite:
///   sum (M_i/m) log[ (M_i/m) / ((N_i + c)/(n + k c)) ].
double aplugin_kl(const SampleHistogram& M, const SampleHistogram& N,
                  const EstimatorConfig& config);

/// Cross term D2, the estimate of sum P_i log Q_i. Per bin: (M_i/m) g(N_i)
/// when N_select_i <= c2 log k (polynomial branch, degree
/// L = max(floor(c0 ln k), 1)), else the bias-corrected plug-in
/// (M_i/m)(log((N_i+1)/n) - 1/(2(N_i+1))). n is the nominal Q-side sample
/// budget (multinomial size or Poissonization mean); k the alphabet size.
/// m_nominal overrides the P-side budget in the M_i/m prefactor; the
/// default -1 uses M.total() (exact for multinomial samples).
PartEstimate opt_cross_part(const SampleHistogram& M, const SampleHistogram& N,
                            const SampleHistogram& N_select,
                            const EstimatorConfig& config, std::int64_t n,
                            std::int64_t k, std::int64_t m_nominal = -1);

/// Entropy term D1, the estimate of sum P_i log P_i. Per bin: g'(M_i) when
/// M_select_i <= c2' log k, else (M_i/m) log(M_i/m) - 1/(2m).
PartEstimate opt_entropy_part(const SampleHistogram& M,
                              const SampleHistogram& M_select,
                              const EstimatorConfig& config, std::int64_t m,
                              std::int64_t k);

/// Minimax estimator D1 - D2 assembled from the two parts. m_split carries
/// (M, M_select), n_split carries (N, N_select); m and n are the nominal
/// sample budgets. With config.clip_bound_f set, the raw difference is
/// clamped to [0, log f].
DivergenceEstimate opt_kl(const SplitSamples& m_split,
                          const SplitSamples& n_split,
                          const EstimatorConfig& config, std::int64_t k,
                          std::int64_t m, std::int64_t n);

/// Convenience overload taking the nominal budgets from the estimation
/// histograms' totals.
DivergenceEstimate opt_kl(const SplitSamples& m_split,
                          const SplitSamples& n_split,
                          const EstimatorConfig& config, std::int64_t k);

/// Plug-in entropy -sum (M_i/m) log(M_i/m); value in [0, log k].
double plugin_entropy(const SampleHistogram& M);

/// Polynomial degree used by the optimal estimator: max(floor(c0 ln k), 1).
std::int64_t poly_degree(double c0, std::int64_t k);

} // namespace divrate
