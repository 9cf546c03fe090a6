#include "divrate/approx.hpp"

#include <cmath>
#include <string>

namespace divrate {
namespace {

// gamma(x) = a p(x/a) + x log a written in the monomial basis of x:
// coefficient j is base_j * a^(1-j), with the x log a shift folded into
// degree 1.
std::vector<double> rescaled_coeffs(const ApproxPolynomial& base, double a) {
  const std::vector<double>& b = base.coeffs();
  std::vector<double> c(b.size());
  c[0] = b[0] * a;
  if (b.size() > 1) c[1] = b[1] + std::log(a);
  double scale = 1.0;
  for (std::size_t j = 2; j < b.size(); ++j) {
    scale /= a;
    c[j] = b[j] * scale;
  }
  return c;
}

void check_interval_match(const RescaledPoly& poly, double n, double k,
                          double c1, const char* where) {
  double a = c1 * std::log(k) / n;
  if (std::abs(a - poly.interval_hi()) >
      1e-9 * std::max(a, poly.interval_hi()))
    throw invalid_parameter(std::string(where) +
                            ": (n, k, c1) do not reproduce the polynomial's "
                            "interval endpoint");
}

} // namespace

RescaledPoly::RescaledPoly(std::vector<double> coeffs, double a, Kind kind,
                           bool domain_warning, ApproxPolynomial base)
    : coeffs_(std::move(coeffs)), a_(a), kind_(kind),
      domain_warning_(domain_warning), base_(std::move(base)) {
  if (coeffs_.size() != base_.coeffs().size())
    throw invalid_parameter("RescaledPoly: coefficient length mismatch");
  if (!(a_ > 0.0) || !std::isfinite(a_))
    throw invalid_parameter("RescaledPoly: interval endpoint must be > 0");
  if (kind_ == Kind::mu && coeffs_[0] != 0.0)
    throw invalid_parameter("RescaledPoly: mu form requires coeffs[0] = 0");
}

double RescaledPoly::residual_bound() const {
  double gamma_bound = a_ * base_.sup_error();
  if (kind_ == Kind::gamma) return gamma_bound;
  return gamma_bound + std::abs(base_.coeffs()[0]) * a_;
}

double RescaledPoly::evaluate(double x) const {
  double value = a_ * base_.evaluate(x / a_) + x * std::log(a_);
  if (kind_ == Kind::mu) value -= base_.coeffs()[0] * a_;
  return value;
}

RescaledPoly rescale_gamma(const ApproxPolynomial& base, double n, double k,
                           double c1) {
  if (!(n >= 2.0)) throw invalid_parameter("rescale_gamma: n must be >= 2");
  if (!(k >= 2.0)) throw invalid_parameter("rescale_gamma: k must be >= 2");
  if (!(c1 > 0.0)) throw invalid_parameter("rescale_gamma: c1 must be > 0");
  double a = c1 * std::log(k) / n;
  return RescaledPoly(rescaled_coeffs(base, a), a, RescaledPoly::Kind::gamma,
                      a >= 1.0, base);
}

RescaledPoly drop_zero_degree(const RescaledPoly& gamma) {
  if (gamma.kind() != RescaledPoly::Kind::gamma)
    throw invalid_parameter("drop_zero_degree: input must be the gamma form");
  std::vector<double> c = gamma.coeffs();
  c[0] = 0.0;
  return RescaledPoly(std::move(c), gamma.interval_hi(),
                      RescaledPoly::Kind::mu, gamma.domain_warning(),
                      gamma.base());
}

FactorialCoeffs gl_coefficients(const RescaledPoly& mu, double n, double k,
                                double c1) {
  if (mu.kind() != RescaledPoly::Kind::mu)
    throw invalid_parameter("gl_coefficients: input must be the mu form");
  check_interval_match(mu, n, k, c1, "gl_coefficients");
  const std::vector<double>& b = mu.base().coeffs();
  std::size_t degree = b.size() - 1; // L
  double clogk = c1 * std::log(k);

  FactorialCoeffs fc;
  fc.first_order = 0;
  fc.offset = -std::log(n / clogk);
  fc.weights.resize(degree);
  double scale = 1.0; // (c1 log k)^{-(j-1)}
  for (std::size_t j = 1; j <= degree; ++j) {
    fc.weights[j - 1] = b[j] * scale;
    scale /= clogk;
  }
  fc.source_coeffs = mu.coeffs();
  return fc;
}

FactorialCoeffs glprime_coefficients(const ApproxPolynomial& base, double m,
                                     double k, double c1_prime) {
  if (!(m >= 1.0))
    throw invalid_parameter("glprime_coefficients: m must be >= 1");
  if (!(k >= 2.0))
    throw invalid_parameter("glprime_coefficients: k must be >= 2");
  if (!(c1_prime > 0.0))
    throw invalid_parameter("glprime_coefficients: c1' must be > 0");
  const std::vector<double>& b = base.coeffs();
  std::size_t degree = b.size() - 1; // L'
  double clogk = c1_prime * std::log(k);
  double a = clogk / m;

  // (1/m) sum_j a_j (M)_j / (c1' log k)^{j-1}  -  (1/m) log(m/(c1' log k)) M,
  // with the log term folded into the weight on (M)_1, so the estimator
  // vanishes structurally at M = 0.
  FactorialCoeffs fc;
  fc.first_order = 1;
  fc.offset = 0.0;
  fc.weights.resize(degree);
  double scale = 1.0 / m;
  for (std::size_t j = 1; j <= degree; ++j) {
    fc.weights[j - 1] = b[j] * scale;
    scale /= clogk;
  }
  fc.weights[0] += std::log(a) / m; // -log(m / (c1' log k)) / m
  fc.source_coeffs = rescaled_coeffs(base, a);
  fc.source_coeffs[0] = 0.0; // expectation target is the mu form
  return fc;
}

double eval_factorial_estimator(const FactorialCoeffs& fc,
                                std::int64_t count) {
  if (count < 0)
    throw invalid_parameter("eval_factorial_estimator: count must be >= 0");
  if (fc.first_order < 0)
    throw invalid_parameter("eval_factorial_estimator: negative first order");
  long double acc = fc.offset;
  long double falling = 1.0L; // (count)_order for the running order
  long double x = static_cast<long double>(count);
  for (int s = 0; s < fc.first_order; ++s)
    falling *= x - static_cast<long double>(s);
  for (std::size_t t = 0; t < fc.weights.size(); ++t) {
    long double term = static_cast<long double>(fc.weights[t]) * falling;
    if (!std::isfinite(term))
      throw factorial_overflow(
          "eval_factorial_estimator: weighted term " + std::to_string(t) +
          " overflows at count " + std::to_string(count));
    acc += term;
    falling *= x - static_cast<long double>(fc.first_order) -
               static_cast<long double>(t);
    if (!std::isfinite(falling))
      throw factorial_overflow(
          "eval_factorial_estimator: falling factorial of order " +
          std::to_string(fc.first_order + static_cast<int>(t) + 1) +
          " overflows at count " + std::to_string(count));
  }
  double result = static_cast<double>(acc);
  if (!std::isfinite(result))
    throw factorial_overflow(
        "eval_factorial_estimator: accumulated value overflows at count " +
        std::to_string(count));
  return result;
}

} // namespace divrate
