#include "divrate/distribution.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace divrate {
namespace {

constexpr double kSumTolerance = 1e-12;
// Relative slack for the per-bin ratio check: the constructions below hit
// the bound exactly in real arithmetic, so rounding must not fail them.
constexpr double kRatioSlack = 1e-9;

// Neumaier compensated summation: keeps the validation tolerance meaningful
// at alphabet sizes around 1e6 where naive summation drifts past 1e-12.
double compensated_sum(const std::vector<double>& v) {
  double sum = 0.0;
  double compensation = 0.0;
  for (double x : v) {
    double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      compensation += (sum - t) + x;
    else
      compensation += (x - t) + sum;
    sum = t;
  }
  return sum + compensation;
}

void check_entries(const std::vector<double>& probs) {
  if (probs.empty())
    throw invalid_parameter("DiscreteDistribution: alphabet must be non-empty");
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p))
      throw invalid_parameter(
          "DiscreteDistribution: entries must be finite and non-negative");
  }
}

} // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<double> probs)
    : probs_(std::move(probs)) {
  check_entries(probs_);
  double sum = compensated_sum(probs_);
  if (std::abs(sum - 1.0) > kSumTolerance)
    throw invalid_parameter(
        "DiscreteDistribution: probabilities sum to " + std::to_string(sum) +
        ", outside 1 +/- 1e-12");
  // Absorb the residual rounding so downstream identities hold exactly.
  if (sum != 1.0)
    for (double& p : probs_) p /= sum;
}

DiscreteDistribution DiscreteDistribution::normalized(
    std::vector<double> weights) {
  check_entries(weights);
  double sum = compensated_sum(weights);
  if (!(sum > 0.0))
    throw invalid_parameter("DiscreteDistribution: total weight must be > 0");
  for (double& w : weights) w /= sum;
  return DiscreteDistribution(std::move(weights), already_normalized_tag{});
}

BoundedRatioPair::BoundedRatioPair(DiscreteDistribution p,
                                   DiscreteDistribution q, double ratio_bound)
    : p_(std::move(p)), q_(std::move(q)), ratio_bound_(ratio_bound) {
  if (p_.size() != q_.size())
    throw invalid_parameter("BoundedRatioPair: alphabet size mismatch");
  if (!(ratio_bound >= 1.0) || !std::isfinite(ratio_bound))
    throw invalid_parameter("BoundedRatioPair: ratio bound must be >= 1");
  for (std::int64_t i = 0; i < p_.size(); ++i) {
    double pi = p_[static_cast<std::size_t>(i)];
    double qi = q_[static_cast<std::size_t>(i)];
    if (pi > ratio_bound * qi * (1.0 + kRatioSlack))
      throw invalid_parameter(
          "BoundedRatioPair: P_i <= f * Q_i violated at bin " +
          std::to_string(i));
  }
}

double kl_divergence(const DiscreteDistribution& p,
                     const DiscreteDistribution& q) {
  if (p.size() != q.size())
    throw invalid_parameter("kl_divergence: alphabet size mismatch");
  double sum = 0.0;
  double compensation = 0.0;
  for (std::int64_t i = 0; i < p.size(); ++i) {
    double pi = p[static_cast<std::size_t>(i)];
    if (pi == 0.0) continue; // 0 log 0 = 0 and 0 log(0/0) = 0
    double qi = q[static_cast<std::size_t>(i)];
    if (qi == 0.0) return std::numeric_limits<double>::infinity();
    double term = pi * std::log(pi / qi);
    double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      compensation += (sum - t) + term;
    else
      compensation += (term - t) + sum;
    sum = t;
  }
  return sum + compensation;
}

double entropy(const DiscreteDistribution& p) {
  double sum = 0.0;
  double compensation = 0.0;
  for (std::int64_t i = 0; i < p.size(); ++i) {
    double pi = p[static_cast<std::size_t>(i)];
    if (pi == 0.0) continue;
    double term = -pi * std::log(pi);
    double t = sum + term;
    if (std::abs(sum) >= std::abs(term))
      compensation += (sum - t) + term;
    else
      compensation += (term - t) + sum;
    sum = t;
  }
  double h = sum + compensation;
  return h == 0.0 ? 0.0 : h; // normalize -0.0 from point masses
}

double density_ratio_max(const DiscreteDistribution& p,
                         const DiscreteDistribution& q) {
  if (p.size() != q.size())
    throw invalid_parameter("density_ratio_max: alphabet size mismatch");
  double best = 0.0;
  for (std::int64_t i = 0; i < p.size(); ++i) {
    double pi = p[static_cast<std::size_t>(i)];
    if (pi == 0.0) continue;
    double qi = q[static_cast<std::size_t>(i)];
    if (qi == 0.0) return std::numeric_limits<double>::infinity();
    best = std::max(best, pi / qi);
  }
  return best;
}

DiscreteDistribution make_uniform(std::int64_t k) {
  if (k < 1) throw invalid_parameter("make_uniform: k must be >= 1");
  return DiscreteDistribution(
      std::vector<double>(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k)));
}

DiscreteDistribution make_zipf(std::int64_t k, double alpha) {
  if (k < 1) throw invalid_parameter("make_zipf: k must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha))
    throw invalid_parameter("make_zipf: alpha must be finite and >= 0");
  std::vector<double> weights(static_cast<std::size_t>(k));
  for (std::int64_t i = 0; i < k; ++i)
    weights[static_cast<std::size_t>(i)] =
        std::pow(static_cast<double>(i + 1), -alpha);
  return DiscreteDistribution::normalized(std::move(weights));
}

BoundedRatioPair make_worst_case_pair_bias_I(std::int64_t k, double f) {
  if (k < 1) throw invalid_parameter("make_worst_case_pair_bias_I: k >= 1");
  if (!(f >= 10.0))
    throw invalid_parameter(
        "make_worst_case_pair_bias_I: requires f >= 10 for a valid pair");
  std::size_t sk = static_cast<std::size_t>(k);
  double small = 10.0 / (static_cast<double>(k) * f);
  std::vector<double> q(sk, small);
  q[sk - 1] = 1.0 - static_cast<double>(k - 1) * small;
  return BoundedRatioPair(make_uniform(k), DiscreteDistribution(std::move(q)),
                          f);
}

BoundedRatioPair make_worst_case_pair_bias_II(std::int64_t k, std::int64_t n,
                                              double f) {
  if (k < 1) throw invalid_parameter("make_worst_case_pair_bias_II: k >= 1");
  if (n < 1) throw invalid_parameter("make_worst_case_pair_bias_II: n >= 1");
  if (!(f >= 1.0) || !std::isfinite(f))
    throw invalid_parameter("make_worst_case_pair_bias_II: f must be >= 1");
  std::size_t sk = static_cast<std::size_t>(k);
  double p_small = f / (4.0 * static_cast<double>(n));
  double q_small = 1.0 / (4.0 * static_cast<double>(n));
  double p_last = 1.0 - static_cast<double>(k - 1) * p_small;
  if (p_last < 0.0)
    throw invalid_parameter(
        "make_worst_case_pair_bias_II: (k-1) f / (4n) exceeds 1");
  std::vector<double> p(sk, p_small);
  std::vector<double> q(sk, q_small);
  p[sk - 1] = p_last;
  q[sk - 1] = 1.0 - static_cast<double>(k - 1) * q_small;
  return BoundedRatioPair(DiscreteDistribution(std::move(p)),
                          DiscreteDistribution(std::move(q)), f);
}

std::pair<BoundedRatioPair, BoundedRatioPair>
make_twopoint_variance_m(std::int64_t k, double f, std::int64_t m) {
  if (k < 2) throw invalid_parameter("make_twopoint_variance_m: k >= 2");
  if (m < 9)
    throw invalid_parameter(
        "make_twopoint_variance_m: m >= 9 so that epsilon = 1/sqrt(m) <= 1/3");
  if (!(f >= 1.0) || !std::isfinite(f))
    throw invalid_parameter("make_twopoint_variance_m: f must be >= 1");
  std::size_t sk = static_cast<std::size_t>(k);
  double eps = 1.0 / std::sqrt(static_cast<double>(m));
  double km1 = static_cast<double>(k - 1);

  std::vector<double> p1(sk, 1.0 / (3.0 * km1));
  p1[sk - 1] = 2.0 / 3.0;
  std::vector<double> p2(sk, (1.0 - eps) / (3.0 * km1));
  p2[sk - 1] = (2.0 + eps) / 3.0;
  std::vector<double> q(sk, 1.0 / (3.0 * km1 * f));
  q[sk - 1] = 1.0 - 1.0 / (3.0 * f);

  DiscreteDistribution shared_q(q);
  return {BoundedRatioPair(DiscreteDistribution(std::move(p1)), shared_q, f),
          BoundedRatioPair(DiscreteDistribution(std::move(p2)),
                           std::move(shared_q), f)};
}

std::pair<BoundedRatioPair, BoundedRatioPair>
make_twopoint_variance_n(std::int64_t k, double f, std::int64_t n) {
  if (k < 3 || (k - 1) % 2 != 0)
    throw invalid_parameter(
        "make_twopoint_variance_n: requires k >= 3 with k - 1 even");
  if (!(f >= 1.0) || !std::isfinite(f))
    throw invalid_parameter("make_twopoint_variance_n: f must be >= 1");
  if (n < 1) throw invalid_parameter("make_twopoint_variance_n: n >= 1");
  double eps = std::sqrt(f / static_cast<double>(n));
  if (!(eps < 1.0 / 3.0))
    throw invalid_parameter(
        "make_twopoint_variance_n: epsilon = sqrt(f/n) must be < 1/3");
  std::size_t sk = static_cast<std::size_t>(k);
  double km1 = static_cast<double>(k - 1);

  std::vector<double> p(sk, 0.0);
  for (std::size_t i = 0; i + 1 < sk; i += 2) p[i] = 1.0 / (3.0 * km1);
  p[sk - 1] = 5.0 / 6.0;

  double w = 1.0 / (2.0 * km1 * f);
  std::vector<double> q1(sk, w);
  q1[sk - 1] = 1.0 - 1.0 / (2.0 * f);
  std::vector<double> q2(sk);
  for (std::size_t i = 0; i + 1 < sk; i += 2) {
    q2[i] = (1.0 - eps) * w;
    q2[i + 1] = (1.0 + eps) * w;
  }
  q2[sk - 1] = 1.0 - 1.0 / (2.0 * f);

  DiscreteDistribution shared_p(p);
  return {BoundedRatioPair(shared_p, DiscreteDistribution(std::move(q1)), f),
          BoundedRatioPair(std::move(shared_p),
                           DiscreteDistribution(std::move(q2)), f)};
}

double twopoint_variance_n_divergence(double f, std::int64_t n) {
  if (!(f >= 1.0) || n < 1)
    throw invalid_parameter("twopoint_variance_n_divergence: f >= 1, n >= 1");
  double eps_sq = f / static_cast<double>(n);
  if (!(eps_sq < 1.0))
    throw invalid_parameter(
        "twopoint_variance_n_divergence: requires f/n < 1");
  // Per perturbed bin pair, Q1 puts mass w on each of two bins with
  // Q2-ratios 1/(1-eps) and 1/(1+eps); summed over (k-1)/2 pairs the
  // bin count cancels, leaving (1/(4f)) log(1/(1-eps^2)).
  return -std::log1p(-eps_sq) / (4.0 * f);
}

std::pair<DistributionPair, DistributionPair>
make_inconsistency_pair(double s) {
  if (!(s > 0.5))
    throw invalid_parameter("make_inconsistency_pair: requires s > 1/2");
  DiscreteDistribution p({0.5, 0.5});
  double q1_first = std::exp(-s);
  double q2_first = 1.0 / (2.0 * s);
  DistributionPair first{p, DiscreteDistribution({q1_first, 1.0 - q1_first})};
  DistributionPair second{p, DiscreteDistribution({q2_first, 1.0 - q2_first})};
  return {std::move(first), std::move(second)};
}

DiscreteDistribution permute(const DiscreteDistribution& p,
                             const std::vector<std::size_t>& perm) {
  std::size_t k = static_cast<std::size_t>(p.size());
  if (perm.size() != k)
    throw invalid_parameter("permute: permutation length mismatch");
  std::vector<bool> seen(k, false);
  std::vector<double> out(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (perm[i] >= k || seen[perm[i]])
      throw invalid_parameter("permute: not a permutation of [k]");
    seen[perm[i]] = true;
    out[i] = p[perm[i]];
  }
  return DiscreteDistribution::normalized(std::move(out));
}

} // namespace divrate
