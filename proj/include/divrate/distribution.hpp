#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "divrate/error.hpp"

namespace divrate {

/// A validated probability vector over the alphabet [k].
///
/// Construction checks non-negativity and that the entries sum to 1 within
/// 1e-12 absolute, then renormalizes by the computed sum to absorb rounding.
/// Immutable afterwards; safe to share across threads.
class DiscreteDistribution {
public:
  explicit DiscreteDistribution(std::vector<double> probs);

  /// Builds a distribution from any non-negative vector with positive mass,
  /// dividing by the (compensated) sum. For family constructors whose raw
  /// weights are not already normalized.
  static DiscreteDistribution normalized(std::vector<double> weights);

  std::int64_t size() const noexcept {
    return static_cast<std::int64_t>(probs_.size());
  }
  double operator[](std::size_t i) const { return probs_[i]; }
  const std::vector<double>& probs() const noexcept { return probs_; }

private:
  struct already_normalized_tag {};
  DiscreteDistribution(std::vector<double> probs, already_normalized_tag)
      : probs_(std::move(probs)) {}

  std::vector<double> probs_;
};

/// A (P, Q) pair with a verified uniform density-ratio bound:
/// P_i <= ratio_bound * Q_i for every bin, which implies absolute
/// continuity of P with respect to Q and D(P||Q) <= log(ratio_bound).
class BoundedRatioPair {
public:
  BoundedRatioPair(DiscreteDistribution p, DiscreteDistribution q,
                   double ratio_bound);

  const DiscreteDistribution& p() const noexcept { return p_; }
  const DiscreteDistribution& q() const noexcept { return q_; }
  double ratio_bound() const noexcept { return ratio_bound_; }

private:
  DiscreteDistribution p_;
  DiscreteDistribution q_;
  double ratio_bound_;
};

/// A (P, Q) pair that deliberately carries no ratio-bound certificate.
struct DistributionPair {
  DiscreteDistribution p;
  DiscreteDistribution q;
};

// --- exact functionals ----------------------------------------------------

/// KL divergence sum P_i log(P_i / Q_i), natural log, 0 log 0 := 0.
/// Returns +infinity iff some P_i > 0 has Q_i = 0.
double kl_divergence(const DiscreteDistribution& p,
                     const DiscreteDistribution& q);

/// Shannon entropy -sum P_i log P_i in nats; lies in [0, log k].
double entropy(const DiscreteDistribution& p);

/// max over bins with P_i > 0 of P_i / Q_i; +infinity if some Q_i = 0 < P_i.
double density_ratio_max(const DiscreteDistribution& p,
                         const DiscreteDistribution& q);

// --- distribution families -------------------------------------------------

DiscreteDistribution make_uniform(std::int64_t k);

/// Zipf over [k]: entry i proportional to i^(-alpha), i = 1..k.
DiscreteDistribution make_zipf(std::int64_t k, double alpha);

/// Worst-case pair for the regime where too few samples from P dominate the
/// bias: P uniform, Q = (10/(kf), ..., 10/(kf), 1 - 10(k-1)/(kf)).
/// Requires f >= 10 for the construction to be a valid distribution pair.
BoundedRatioPair make_worst_case_pair_bias_I(std::int64_t k, double f);

/// Worst-case pair for the regime where too few samples from Q dominate:
/// P = (f/(4n), ..., 1-(k-1)f/(4n)), Q = (1/(4n), ..., 1-(k-1)/(4n)).
/// The first k-1 bins have density ratio exactly f.
BoundedRatioPair make_worst_case_pair_bias_II(std::int64_t k, std::int64_t n,
                                              double f);

/// Two-point pair separating estimators in the m-sample direction:
/// shared Q, and P perturbed by epsilon = 1/sqrt(m) on the last bin.
std::pair<BoundedRatioPair, BoundedRatioPair>
make_twopoint_variance_m(std::int64_t k, double f, std::int64_t m);

/// Two-point pair in the n-sample direction: shared P with alternating
/// zero-mass bins, Q perturbed by epsilon = sqrt(f/n) on alternating bins.
/// Requires k-1 even and epsilon < 1/3.
std::pair<BoundedRatioPair, BoundedRatioPair>
make_twopoint_variance_n(std::int64_t k, double f, std::int64_t n);

/// Closed form for D(Q1||Q2) of the make_twopoint_variance_n pair:
/// (1/(4f)) * log(1/(1-eps^2)) with eps = sqrt(f/n).
double twopoint_variance_n_divergence(double f, std::int64_t n);

/// k=2 pairs with a common P = (1/2, 1/2) whose divergences grow like s
/// and log s respectively while the Q marginals stay nearly
/// indistinguishable; they violate any fixed ratio bound by design.
std::pair<DistributionPair, DistributionPair>
make_inconsistency_pair(double s);

/// Applies the same bin permutation to a distribution.
DiscreteDistribution permute(const DiscreteDistribution& p,
                             const std::vector<std::size_t>& perm);

} // namespace divrate
