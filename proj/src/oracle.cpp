#include "divrate/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace divrate {
namespace {

constexpr double kJointGuard = 1e7;    // max enumerated outcome pairs
constexpr double kBinTail = 1e-14;     // per-bin Poisson truncation tail

// Fixed-order pairwise summation: the reduction is associative-in-shape
// only, so using the same shape regardless of thread count keeps results
// bit-stable.
double pairwise_sum(const double* v, std::size_t n) {
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = v[0];
    for (std::size_t i = 1; i < n; ++i) s += v[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

double log_binomial_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
         std::lgamma(n - k + 1.0);
}

// --- outcome spaces ---------------------------------------------------------

// Compositions of `total` into k ordered non-negative parts, lexicographic
// on the first k-1 coordinates, with the multinomial log-pmf of each.
class CompositionIter {
public:
  CompositionIter(std::int64_t total, const std::vector<double>& probs)
      : total_(total), probs_(probs), counts_(probs.size(), 0),
        log_probs_(probs.size()) {
    counts_.back() = total_;
    for (std::size_t i = 0; i < probs_.size(); ++i)
      log_probs_[i] = probs_[i] > 0.0 ? std::log(probs_[i])
                                      : -std::numeric_limits<double>::infinity();
    log_total_fact_ = std::lgamma(static_cast<double>(total_) + 1.0);
    first_ = true;
  }

  static double outcome_count(std::int64_t total, std::size_t k) {
    return std::exp(log_binomial_choose(
        static_cast<double>(total) + static_cast<double>(k) - 1.0,
        static_cast<double>(k) - 1.0));
  }

  // Advances to the next composition; returns false when exhausted.
  bool next() {
    if (first_) {
      first_ = false;
      return true;
    }
    std::size_t k = counts_.size();
    if (k == 1) return false;
    // Find the rightmost prefix coordinate that can still grow (some mass
    // remains to its right), bump it, and reset everything after it.
    // suffix accumulates the units strictly right of i during the descent,
    // so on success the bumped bin takes one of them and the rest move to
    // the last bin.
    std::int64_t suffix = counts_[k - 1];
    for (std::size_t i = k - 1; i-- > 0;) {
      if (suffix > 0) {
        counts_[i] += 1;
        for (std::size_t j = i + 1; j + 1 < k; ++j) counts_[j] = 0;
        counts_[k - 1] = suffix - 1;
        return true;
      }
      suffix += counts_[i];
    }
    return false;
  }

  const std::vector<std::int64_t>& counts() const { return counts_; }

  double probability() const {
    double logp = log_total_fact_;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      std::int64_t c = counts_[i];
      if (c == 0) continue;
      if (probs_[i] == 0.0) return 0.0;
      logp += static_cast<double>(c) * log_probs_[i] -
              std::lgamma(static_cast<double>(c) + 1.0);
    }
    return std::exp(logp);
  }

private:
  std::int64_t total_;
  std::vector<double> probs_;
  std::vector<std::int64_t> counts_;
  std::vector<double> log_probs_;
  double log_total_fact_;
  bool first_;
};

// Truncated per-bin Poisson pmf table: support [0, cap] with tail < 1e-14.
std::vector<double> poisson_table(double lambda) {
  if (lambda < 0.0)
    throw invalid_parameter("oracle: negative Poisson mean");
  if (lambda == 0.0) return {1.0};
  if (lambda > 1e6)
    throw enumeration_too_large(
        "oracle: Poisson bin mean too large to truncate", lambda);
  std::vector<double> pmf;
  double cum = 0.0;
  double hard_cap =
      lambda + 20.0 * std::sqrt(lambda) + 200.0;
  for (std::int64_t c = 0; cum < 1.0 - kBinTail; ++c) {
    double lp = -lambda + static_cast<double>(c) * std::log(lambda) -
                std::lgamma(static_cast<double>(c) + 1.0);
    double p = std::exp(lp);
    pmf.push_back(p);
    cum += p;
    if (static_cast<double>(c) > hard_cap) break;
  }
  return pmf;
}

// Odometer over a product of per-bin truncated Poisson supports.
class OdometerIter {
public:
  explicit OdometerIter(std::vector<std::vector<double>> tables)
      : tables_(std::move(tables)), counts_(tables_.size(), 0), first_(true) {}

  double outcome_count() const {
    double c = 1.0;
    for (const auto& t : tables_) c *= static_cast<double>(t.size());
    return c;
  }

  bool next() {
    if (first_) {
      first_ = false;
      return true;
    }
    for (std::size_t i = counts_.size(); i-- > 0;) {
      if (counts_[i] + 1 <
          static_cast<std::int64_t>(tables_[i].size())) {
        counts_[i] += 1;
        for (std::size_t j = i + 1; j < counts_.size(); ++j) counts_[j] = 0;
        return true;
      }
    }
    return false;
  }

  const std::vector<std::int64_t>& counts() const { return counts_; }

  double probability() const {
    double p = 1.0;
    for (std::size_t i = 0; i < counts_.size(); ++i)
      p *= tables_[i][static_cast<std::size_t>(counts_[i])];
    return p;
  }

  void reset() {
    std::fill(counts_.begin(), counts_.end(), 0);
    first_ = true;
  }

private:
  std::vector<std::vector<double>> tables_;
  std::vector<std::int64_t> counts_;
  bool first_;
};

// One side (P or Q) of the enumeration: either a multinomial composition
// space over k bins or a product of truncated Poissons over k bins
// (2k bins when the side carries an independent selection histogram).
struct Side {
  bool multinomial = true;
  std::int64_t size = 0; // sample size / Poisson mean
  std::vector<double> probs;
  std::vector<std::vector<double>> tables; // poissonized only
  bool split = false;                      // poissonized opt: two histograms

  double outcome_count() const {
    if (multinomial)
      return CompositionIter::outcome_count(size, probs.size());
    return OdometerIter(tables).outcome_count();
  }
};

Side make_side(const DiscreteDistribution& dist, std::int64_t size,
               OracleSampling sampling, bool split_for_opt) {
  Side s;
  s.size = size;
  s.probs = dist.probs();
  s.multinomial = sampling == OracleSampling::multinomial;
  s.split = !s.multinomial && split_for_opt;
  if (!s.multinomial) {
    std::size_t copies = s.split ? 2 : 1;
    for (std::size_t rep = 0; rep < copies; ++rep)
      for (double p : s.probs)
        s.tables.push_back(poisson_table(static_cast<double>(size) * p));
  }
  return s;
}

// Walks all outcomes of a side, invoking fn(counts, probability).
template <typename Fn>
void for_each_outcome(const Side& side, Fn&& fn) {
  if (side.multinomial) {
    CompositionIter it(side.size, side.probs);
    while (it.next()) {
      double p = it.probability();
      if (p > 0.0) fn(it.counts(), p);
    }
  } else {
    OdometerIter it(side.tables);
    while (it.next()) fn(it.counts(), it.probability());
  }
}

// Extracts the estimation histogram (first k entries) and the selection
// histogram (second k entries for split sides, the same k otherwise).
std::pair<SampleHistogram, SampleHistogram>
split_histograms(const std::vector<std::int64_t>& counts, std::size_t k,
                 bool split) {
  std::vector<std::int64_t> est(counts.begin(),
                                counts.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<std::int64_t> sel =
      split ? std::vector<std::int64_t>(
                  counts.begin() + static_cast<std::ptrdiff_t>(k),
                  counts.end())
            : est;
  return {SampleHistogram(std::move(est)), SampleHistogram(std::move(sel))};
}

struct OutcomeAccumulator {
  double e = 0.0;      // sum p * value over finite outcomes
  double e2 = 0.0;     // sum p * value^2 over finite outcomes
  double p_inf = 0.0;  // mass of infinite-sentinel outcomes
  double mass = 0.0;   // total enumerated mass
};

} // namespace

RiskRate rate_aplugin(double k, double m, double n, double f) {
  if (!(k > 0.0) || !(m > 0.0) || !(n > 0.0))
    throw invalid_parameter("rate_aplugin: k, m, n must be positive");
  if (!(f >= 1.0))
    throw invalid_parameter("rate_aplugin: f must be >= 1");
  RiskRate r;
  r.kind = RiskRate::Kind::aplugin_rate;
  double bias_root = k * f / n + k / m;
  r.bias_sq_term = bias_root * bias_root;
  double logf = std::log(f);
  r.variance_m_term = logf * logf / m;
  r.variance_n_term = f / n;
  r.total = r.bias_sq_term + r.variance_m_term + r.variance_n_term;
  return r;
}

RiskRate rate_minimax(double k, double m, double n, double f) {
  if (!(k >= 2.0))
    throw invalid_parameter("rate_minimax: k must be >= 2 (log k > 0)");
  if (!(m > 0.0) || !(n > 0.0))
    throw invalid_parameter("rate_minimax: m, n must be positive");
  if (!(f >= 1.0))
    throw invalid_parameter("rate_minimax: f must be >= 1");
  RiskRate r;
  r.kind = RiskRate::Kind::minimax_rate;
  double logk = std::log(k);
  double bias_root = k / (m * logk) + k * f / (n * logk);
  r.bias_sq_term = bias_root * bias_root;
  double logf = std::log(f);
  r.variance_m_term = logf * logf / m;
  r.variance_n_term = f / n;
  r.total = r.bias_sq_term + r.variance_m_term + r.variance_n_term;
  return r;
}

ExactMoments exact_estimator_moments(const BoundedRatioPair& pair,
                                     std::int64_t m, std::int64_t n,
                                     OracleEstimator estimator,
                                     const EstimatorConfig& config,
                                     OracleSampling sampling, bool parallel) {
  if (m < 1 || n < 1)
    throw invalid_parameter("exact_estimator_moments: m, n must be >= 1");
  config.validate();
  const std::size_t k = static_cast<std::size_t>(pair.p().size());
  const std::int64_t k64 = pair.p().size();
  const bool poissonized = sampling == OracleSampling::poissonized;
  const bool opt_split = poissonized && estimator == OracleEstimator::opt;

  Side m_side = make_side(pair.p(), m, sampling, opt_split);
  Side n_side = make_side(pair.q(), n, sampling, opt_split);

  double outcome_pairs = m_side.outcome_count() * n_side.outcome_count();
  if (!(outcome_pairs <= kJointGuard))
    throw enumeration_too_large(
        "exact_estimator_moments: outcome space of about " +
            std::to_string(outcome_pairs) + " pairs exceeds the 1e7 guard",
        outcome_pairs);

  const double true_divergence = kl_divergence(pair.p(), pair.q());
  const SplitMode split_mode = poissonized ? SplitMode::poissonized_split
                                           : SplitMode::multinomial_reuse;

  // value of the estimator on one (M-outcome, N-outcome) pair
  auto evaluate = [&](const std::vector<std::int64_t>& mc,
                      const std::vector<std::int64_t>& nc) -> double {
    auto [M, M_sel] = split_histograms(mc, k, m_side.split);
    auto [N, N_sel] = split_histograms(nc, k, n_side.split);
    switch (estimator) {
      case OracleEstimator::plugin: {
        if (M.total() == 0) return 0.0; // empty empirical P: vacuous sum
        for (std::size_t i = 0; i < k; ++i)
          if (M[i] > 0 && N[i] == 0)
            return std::numeric_limits<double>::infinity();
        return plugin_kl(M, N);
      }
      case OracleEstimator::aplugin:
        if (M.total() == 0) return 0.0;
        return aplugin_kl(M, N, config);
      case OracleEstimator::opt: {
        SplitSamples ms(M, M_sel, split_mode);
        SplitSamples ns(N, N_sel, split_mode);
        return opt_kl(ms, ns, config, k64, m, n).value;
      }
      case OracleEstimator::true_divergence_stub:
        return true_divergence;
    }
    throw invalid_parameter("exact_estimator_moments: unknown estimator");
  };

  // Chunked sweep over the M side; each entry owns a full serial N-side
  // sweep, so results are independent of the thread count, and the chunk
  // reduction is a fixed-shape pairwise sum.
  constexpr std::size_t kChunk = 4096;
  std::vector<std::vector<std::int64_t>> chunk_counts;
  std::vector<double> chunk_prob;
  chunk_counts.reserve(kChunk);
  chunk_prob.reserve(kChunk);

  OutcomeAccumulator total;
  std::vector<double> part_e(kChunk), part_e2(kChunk), part_inf(kChunk),
      part_mass(kChunk);

  auto flush_chunk = [&]() {
    std::ptrdiff_t count = static_cast<std::ptrdiff_t>(chunk_counts.size());
    if (count == 0) return;
    auto body = [&](std::ptrdiff_t idx) {
      std::size_t u = static_cast<std::size_t>(idx);
      OutcomeAccumulator acc;
      for_each_outcome(n_side, [&](const std::vector<std::int64_t>& nc,
                                   double pn) {
        double value = evaluate(chunk_counts[u], nc);
        if (std::isinf(value)) {
          acc.p_inf += pn;
        } else {
          acc.e += pn * value;
          acc.e2 += pn * value * value;
        }
        acc.mass += pn;
      });
      double pm = chunk_prob[u];
      part_e[u] = pm * acc.e;
      part_e2[u] = pm * acc.e2;
      part_inf[u] = pm * acc.p_inf;
      part_mass[u] = pm * acc.mass;
    };
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 16)
      for (std::ptrdiff_t idx = 0; idx < count; ++idx) body(idx);
    } else {
      for (std::ptrdiff_t idx = 0; idx < count; ++idx) body(idx);
    }
    std::size_t u = static_cast<std::size_t>(count);
    total.e += pairwise_sum(part_e.data(), u);
    total.e2 += pairwise_sum(part_e2.data(), u);
    total.p_inf += pairwise_sum(part_inf.data(), u);
    total.mass += pairwise_sum(part_mass.data(), u);
    chunk_counts.clear();
    chunk_prob.clear();
  };

  for_each_outcome(m_side, [&](const std::vector<std::int64_t>& mc,
                               double pm) {
    chunk_counts.push_back(mc);
    chunk_prob.push_back(pm);
    if (chunk_counts.size() == kChunk) flush_chunk();
  });
  flush_chunk();

  ExactMoments out;
  double finite_mass = total.mass - total.p_inf;
  if (!(finite_mass > 0.0))
    throw invalid_parameter(
        "exact_estimator_moments: estimator is infinite almost surely");
  out.expectation = total.e / finite_mass;
  out.second_moment = total.e2 / finite_mass;
  out.infinite_probability = total.p_inf;
  out.truncation_mass_dropped = std::max(0.0, 1.0 - total.mass);
  return out;
}

double exact_aplugin_expectation(const BoundedRatioPair& pair, std::int64_t m,
                                 std::int64_t n, const EstimatorConfig& config,
                                 OracleSampling sampling) {
  if (sampling != OracleSampling::multinomial)
    throw invalid_parameter(
        "exact_aplugin_expectation: the estimator normalizes by empirical "
        "totals, which are only constant under multinomial sampling");
  if (m < 1 || n < 1)
    throw invalid_parameter("exact_aplugin_expectation: m, n must be >= 1");
  config.validate();
  const std::size_t k = static_cast<std::size_t>(pair.p().size());
  const double md = static_cast<double>(m);
  const double nd = static_cast<double>(n);
  const double c = config.add_constant_c;
  const double denom = nd + static_cast<double>(k) * c;

  // The estimator is a sum over bins of h_i(M_i) - (M_i/m) * g_i(N_i) with
  // M and N independent, so the expectation needs only the Binomial
  // marginals of each bin:
  //   E[D] = sum_i  E[(M_i/m) log(M_i/m)]  -  P_i * E[log((N_i + c)/(n+kc))].
  auto binomial_logpmf = [](std::int64_t trials, double p, std::int64_t x) {
    double xd = static_cast<double>(x);
    double td = static_cast<double>(trials);
    return log_binomial_choose(td, xd) + xd * std::log(p) +
           (td - xd) * std::log1p(-p);
  };

  double expectation = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double pi = pair.p()[i];
    double qi = pair.q()[i];

    double m_term = 0.0; // E[(M_i/m) log(M_i/m)], zero term at M_i = 0
    if (pi >= 1.0) {
      m_term = 0.0; // point mass at M_i = m: (1) log(1)
    } else if (pi > 0.0) {
      for (std::int64_t a = 1; a <= m; ++a) {
        double w = std::exp(binomial_logpmf(m, pi, a));
        double phat = static_cast<double>(a) / md;
        m_term += w * phat * std::log(phat);
      }
    }

    double n_term; // E[log((N_i + c)/(n + kc))]
    if (qi >= 1.0) {
      n_term = std::log((nd + c) / denom);
    } else if (qi <= 0.0) {
      n_term = std::log(c / denom);
    } else {
      n_term = 0.0;
      for (std::int64_t b = 0; b <= n; ++b) {
        double w = std::exp(binomial_logpmf(n, qi, b));
        n_term += w * std::log((static_cast<double>(b) + c) / denom);
      }
    }

    expectation += m_term - pi * n_term;
  }
  return expectation;
}

double exact_gl_expectation(const FactorialCoeffs& fc, double q, double n) {
  if (!(q > 0.0) || !(q <= 1.0))
    throw invalid_parameter("exact_gl_expectation: q must lie in (0, 1]");
  if (!(n > 0.0) || !(n * q <= 1e4))
    throw invalid_parameter("exact_gl_expectation: requires n > 0, nq <= 1e4");
  double lambda = n * q;
  double w = 10.0 * std::sqrt(lambda + 1.0) + 30.0;
  std::int64_t lo = static_cast<std::int64_t>(
      std::max(0.0, std::floor(lambda - w)));
  std::int64_t hi = static_cast<std::int64_t>(std::ceil(lambda + w));
  double sum = 0.0;
  for (std::int64_t cnt = lo; cnt <= hi; ++cnt) {
    double lp = -lambda + static_cast<double>(cnt) * std::log(lambda) -
                std::lgamma(static_cast<double>(cnt) + 1.0);
    sum += std::exp(lp) * eval_factorial_estimator(fc, cnt);
  }
  return sum;
}

} // namespace divrate
