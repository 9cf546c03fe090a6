#include "divrate/estimators.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include "divrate/remez.hpp"

namespace divrate {
namespace {

// Remez runs dominate the cost of sweeping estimators across sample sizes,
// while everything derived from the base polynomial is O(L). Cache the base
// approximation per degree; the mutex gives single-writer population and
// map nodes are stable, so returned references stay valid.
const ApproxPolynomial& cached_remez(std::int64_t degree) {
  static std::mutex mutex;
  static std::map<std::int64_t, ApproxPolynomial> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(degree);
  if (it == cache.end())
    it = cache.emplace(degree, remez_xlogx(degree)).first;
  return it->second;
}

void check_alphabets(const SampleHistogram& a, const SampleHistogram& b,
                     const char* where) {
  if (a.alphabet_size() != b.alphabet_size())
    throw invalid_parameter(std::string(where) + ": alphabet size mismatch");
}

// The polynomial branch needs a shrinking approximation interval, which
// requires log k > 0 and a sample budget of at least 2; below that the
// bias-corrected plug-in formula of the same side is used for every bin
// (tallied as plugin-branch).
bool poly_branch_available(std::int64_t k, std::int64_t budget) {
  return k >= 2 && budget >= 2;
}

} // namespace

void EstimatorConfig::validate() const {
  if (!(add_constant_c > 0.0) || !std::isfinite(add_constant_c))
    throw invalid_parameter("EstimatorConfig: add constant c must be > 0");
  auto check_triplet = [](double v0, double v1, double v2, const char* side) {
    if (!(v0 > 0.0) || !(v1 > 0.0) || !(v2 > 0.0))
      throw invalid_parameter(std::string("EstimatorConfig: ") + side +
                              " c0, c1, c2 must be > 0");
    if (v2 > v1)
      throw invalid_parameter(std::string("EstimatorConfig: ") + side +
                              " requires c2 <= c1");
  };
  check_triplet(c0, c1, c2, "cross-side");
  check_triplet(c0_prime, c1_prime, c2_prime, "entropy-side");
  if (clip_bound_f && (!(*clip_bound_f >= 1.0) || !std::isfinite(*clip_bound_f)))
    throw invalid_parameter("EstimatorConfig: clip bound f must be >= 1");
}

std::int64_t poly_degree(double c0, std::int64_t k) {
  if (!(c0 > 0.0) || k < 1)
    throw invalid_parameter("poly_degree: c0 > 0 and k >= 1 required");
  double l = std::floor(c0 * std::log(static_cast<double>(k)));
  return std::max<std::int64_t>(static_cast<std::int64_t>(l), 1);
}

double plugin_kl(const SampleHistogram& M, const SampleHistogram& N) {
  check_alphabets(M, N, "plugin_kl");
  if (M.total() < 1 || N.total() < 1)
    throw invalid_parameter("plugin_kl: both samples must be non-empty");
  double m = static_cast<double>(M.total());
  double n = static_cast<double>(N.total());
  double sum = 0.0;
  for (std::int64_t i = 0; i < M.alphabet_size(); ++i) {
    std::int64_t mi = M[static_cast<std::size_t>(i)];
    if (mi == 0) continue;
    std::int64_t ni = N[static_cast<std::size_t>(i)];
    if (ni == 0) return std::numeric_limits<double>::infinity();
    double phat = static_cast<double>(mi) / m;
    double qhat = static_cast<double>(ni) / n;
    sum += phat * std::log(phat / qhat);
  }
  return sum;
}

double aplugin_kl(const SampleHistogram& M, const SampleHistogram& N,
                  const EstimatorConfig& config) {
  check_alphabets(M, N, "aplugin_kl");
  if (M.total() < 1)
    throw invalid_parameter("aplugin_kl: P-side sample must be non-empty");
  config.validate();
  double m = static_cast<double>(M.total());
  double n = static_cast<double>(N.total());
  double k = static_cast<double>(M.alphabet_size());
  double c = config.add_constant_c;
  double denom = n + k * c;
  double sum = 0.0;
  for (std::int64_t i = 0; i < M.alphabet_size(); ++i) {
    std::int64_t mi = M[static_cast<std::size_t>(i)];
    if (mi == 0) continue;
    double phat = static_cast<double>(mi) / m;
    double qsmooth = (static_cast<double>(N[static_cast<std::size_t>(i)]) + c) /
                     denom;
    sum += phat * std::log(phat / qsmooth);
  }
  return sum;
}

PartEstimate opt_cross_part(const SampleHistogram& M, const SampleHistogram& N,
                            const SampleHistogram& N_select,
                            const EstimatorConfig& config, std::int64_t n,
                            std::int64_t k, std::int64_t m_nominal) {
  check_alphabets(M, N, "opt_cross_part");
  check_alphabets(N, N_select, "opt_cross_part");
  if (M.alphabet_size() != k)
    throw invalid_parameter("opt_cross_part: k must equal the alphabet size");
  if (n < 1) throw invalid_parameter("opt_cross_part: n must be >= 1");
  config.validate();
  double m = static_cast<double>(m_nominal >= 1 ? m_nominal : M.total());
  if (!(m >= 1.0))
    throw invalid_parameter("opt_cross_part: P-side sample must be non-empty");
  double nd = static_cast<double>(n);
  double threshold = config.c2 * std::log(static_cast<double>(k));
  bool use_poly = poly_branch_available(k, n);

  FactorialCoeffs fc;
  if (use_poly) {
    const ApproxPolynomial& base = cached_remez(poly_degree(config.c0, k));
    RescaledPoly mu = drop_zero_degree(
        rescale_gamma(base, nd, static_cast<double>(k), config.c1));
    fc = gl_coefficients(mu, nd, static_cast<double>(k), config.c1);
  }

  PartEstimate out;
  for (std::int64_t i = 0; i < k; ++i) {
    std::size_t idx = static_cast<std::size_t>(i);
    double weight = static_cast<double>(M[idx]) / m;
    if (use_poly &&
        static_cast<double>(N_select[idx]) <= threshold) {
      out.branches.poly_branch += 1;
      out.value += weight * eval_factorial_estimator(fc, N[idx]);
    } else {
      out.branches.plugin_branch += 1;
      double ni1 = static_cast<double>(N[idx]) + 1.0;
      out.value += weight * (std::log(ni1 / nd) - 1.0 / (2.0 * ni1));
    }
  }
  return out;
}

PartEstimate opt_entropy_part(const SampleHistogram& M,
                              const SampleHistogram& M_select,
                              const EstimatorConfig& config, std::int64_t m,
                              std::int64_t k) {
  check_alphabets(M, M_select, "opt_entropy_part");
  if (M.alphabet_size() != k)
    throw invalid_parameter("opt_entropy_part: k must equal the alphabet size");
  if (m < 1) throw invalid_parameter("opt_entropy_part: m must be >= 1");
  config.validate();
  double md = static_cast<double>(m);
  double threshold = config.c2_prime * std::log(static_cast<double>(k));
  bool use_poly = poly_branch_available(k, m);

  FactorialCoeffs fc;
  if (use_poly) {
    const ApproxPolynomial& base =
        cached_remez(poly_degree(config.c0_prime, k));
    fc = glprime_coefficients(base, md, static_cast<double>(k),
                              config.c1_prime);
  }

  PartEstimate out;
  for (std::int64_t i = 0; i < k; ++i) {
    std::size_t idx = static_cast<std::size_t>(i);
    if (use_poly &&
        static_cast<double>(M_select[idx]) <= threshold) {
      out.branches.poly_branch += 1;
      out.value += eval_factorial_estimator(fc, M[idx]);
    } else {
      out.branches.plugin_branch += 1;
      double mi = static_cast<double>(M[idx]);
      double xlogterm = mi > 0.0 ? (mi / md) * std::log(mi / md) : 0.0;
      out.value += xlogterm - 1.0 / (2.0 * md);
    }
  }
  return out;
}

DivergenceEstimate opt_kl(const SplitSamples& m_split,
                          const SplitSamples& n_split,
                          const EstimatorConfig& config, std::int64_t k,
                          std::int64_t m, std::int64_t n) {
  PartEstimate d1 =
      opt_entropy_part(m_split.first, m_split.second, config, m, k);
  PartEstimate d2 = opt_cross_part(m_split.first, n_split.first,
                                   n_split.second, config, n, k, m);
  DivergenceEstimate out;
  out.d1_part = d1.value;
  out.d2_part = d2.value;
  out.entropy_side = d1.branches;
  out.cross_side = d2.branches;
  double raw = d1.value - d2.value;
  if (config.clip_bound_f) {
    double hi = std::log(*config.clip_bound_f);
    out.value = std::min(std::max(raw, 0.0), hi);
    out.clipped = out.value != raw;
  } else {
    out.value = raw;
  }
  return out;
}

DivergenceEstimate opt_kl(const SplitSamples& m_split,
                          const SplitSamples& n_split,
                          const EstimatorConfig& config, std::int64_t k) {
  if (m_split.first.total() < 1 || n_split.first.total() < 1)
    throw invalid_parameter("opt_kl: both samples must be non-empty");
  return opt_kl(m_split, n_split, config, k, m_split.first.total(),
                n_split.first.total());
}

double plugin_entropy(const SampleHistogram& M) {
  if (M.total() < 1)
    throw invalid_parameter("plugin_entropy: sample must be non-empty");
  double m = static_cast<double>(M.total());
  double sum = 0.0;
  for (std::int64_t i = 0; i < M.alphabet_size(); ++i) {
    std::int64_t mi = M[static_cast<std::size_t>(i)];
    if (mi == 0) continue;
    double phat = static_cast<double>(mi) / m;
    sum -= phat * std::log(phat);
  }
  return sum == 0.0 ? 0.0 : sum;
}

} // namespace divrate
