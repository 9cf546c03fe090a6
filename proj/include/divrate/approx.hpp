#pragma once

#include <cstdint>
#include <vector>

#include "divrate/error.hpp"
#include "divrate/remez.hpp"

namespace divrate {

/// The best [0,1] approximation of x log x transported to [0, a] with
/// a = c1 * log(k) / n:
///
///   gamma(x) = a * p(x/a) + x * log(a)
///            = sum_j  base_j * a^(1-j) * x^j  +  x * log(a),
///
/// which is the best uniform approximation of x log x on [0, a] with sup
/// error exactly a * base_sup_error. The mu form additionally zeroes the
/// constant term (gamma - base_0 * a), so mu(x)/x is a polynomial.
class RescaledPoly {
public:
  enum class Kind { gamma, mu };

  /// coeffs: monomial coefficients on [0, a], ascending degree.
  RescaledPoly(std::vector<double> coeffs, double a, Kind kind,
               bool domain_warning, ApproxPolynomial base);

  const std::vector<double>& coeffs() const noexcept { return coeffs_; }
  double interval_hi() const noexcept { return a_; }
  Kind kind() const noexcept { return kind_; }
  /// True when a >= 1: the rescaled interval did not shrink, so the
  /// approximation-error guarantees aimed at small a are vacuous. The
  /// construction is still well defined; the caller decides what to do.
  bool domain_warning() const noexcept { return domain_warning_; }
  /// The generating [0,1] approximation (monomial coefficients base_j).
  const ApproxPolynomial& base() const noexcept { return base_; }
  /// Sup residual |this - x log x| on [0, a]: a * base.sup_error for the
  /// gamma form; the mu form adds at most |base_0| * a (triangle bound).
  double residual_bound() const;

  /// Numerically stable evaluation via the base Chebyshev representation:
  /// a * p(x/a) + x log a, minus the constant term for the mu form.
  double evaluate(double x) const;

private:
  std::vector<double> coeffs_;
  double a_;
  Kind kind_;
  bool domain_warning_;
  ApproxPolynomial base_;
};

/// Coefficients of a factorial-moment estimator
///
///   est(count) = offset + sum_t weights[t] * (count)_(first_order + t)
///
/// where (x)_j = x (x-1) ... (x-j+1) is the falling factorial ((x)_0 = 1,
/// and (x)_j = 0 for integer 0 <= x < j). Because E[(X)_j] = lambda^j for
/// X ~ Poi(lambda), such an estimator is unbiased for the polynomial
/// offset + sum_t weights[t] * lambda^(first_order+t) under Poisson counts.
struct FactorialCoeffs {
  std::vector<double> weights;
  double offset = 0.0;
  /// Falling-factorial order of weights[0]: 0 for the cross-side g form
  /// (weights on (N)_0 .. (N)_(L-1)), 1 for the entropy-side g' form
  /// (weights on (M)_1 .. (M)_L, which vanishes at count 0).
  int first_order = 0;
  /// The rescaled polynomial this estimator was generated from (kept for
  /// diagnostics and oracle tests; empty coeffs for hand-built instances).
  std::vector<double> source_coeffs;
};

/// Transports a [0,1] best approximation of x log x to [0, a],
/// a = c1 * log(k) / n. k enters only through log k and may be fractional
/// in tests. Sets domain_warning instead of failing when a >= 1.
RescaledPoly rescale_gamma(const ApproxPolynomial& base, double n, double k,
                           double c1);

/// Removes the zero-degree term: mu(x) = gamma(x) - base_0 * a.
RescaledPoly drop_zero_degree(const RescaledPoly& gamma);

/// Builds g(N) = sum_{j=1..L} base_j / (c1 log k)^(j-1) * (N)_(j-1)
///               - log(n / (c1 log k)),
/// the estimator with E[g(N)] = mu(Q)/Q for N ~ Poi(nQ).
/// The (n, k, c1) arguments must reproduce mu's interval endpoint.
FactorialCoeffs gl_coefficients(const RescaledPoly& mu, double n, double k,
                                double c1);

/// Builds g'(M) = (1/m) [ sum_{j=1..L} base_j / (c1' log k)^(j-1) * (M)_j
///                        - log(m / (c1' log k)) * M ],
/// the estimator with E[g'(M)] = a' * p(P/a') + P log a' - base_0 * a'
/// (the mu form of the transported polynomial on [0, a'], a' = c1' log k/m)
/// for M ~ Poi(mP). Evaluates to 0 at M = 0 by construction.
FactorialCoeffs glprime_coefficients(const ApproxPolynomial& base, double m,
                                     double k, double c1_prime);

/// Evaluates est(count) in extended precision; throws factorial_overflow
/// naming the offending term if a product leaves the finite range.
double eval_factorial_estimator(const FactorialCoeffs& fc, std::int64_t count);

} // namespace divrate
