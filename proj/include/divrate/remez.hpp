#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "divrate/error.hpp"

namespace divrate {

/// Best uniform polynomial approximation of x log x on [0, 1].
///
/// Coefficients are stored in two bases. The Chebyshev-basis coefficients
/// (shifted to [0,1]) are the numerically stable representation and are
/// what evaluation and certification use; the monomial coefficients
/// (index j multiplies x^j) are derived from them and feed the
/// factorial-moment construction downstream, which is only exercised at
/// small degrees where the conversion is benign.
class ApproxPolynomial {
public:
  ApproxPolynomial(std::vector<double> monomial, std::vector<double> chebyshev,
                   double sup_error);

  std::int64_t degree() const noexcept {
    return static_cast<std::int64_t>(monomial_.size()) - 1;
  }
  /// Monomial coefficients a_0..a_L of the best approximation to x log x.
  const std::vector<double>& coeffs() const noexcept { return monomial_; }
  /// Shifted-Chebyshev coefficients c_0..c_L (basis T*_j on [0,1]).
  const std::vector<double>& chebyshev_coeffs() const noexcept {
    return chebyshev_;
  }
  /// Certified sup-norm error max_{x in [0,1]} |p(x) - x log x|.
  double sup_error() const noexcept { return sup_error_; }

  /// Evaluates the polynomial at x via the Chebyshev representation
  /// (Clenshaw recurrence); stable at every supported degree.
  double evaluate(double x) const;

private:
  std::vector<double> monomial_;
  std::vector<double> chebyshev_;
  double sup_error_;
};

/// Thrown when the exchange loop fails to meet its convergence criterion
/// within the iteration cap; carries the last iterate for diagnosis.
class remez_not_converged : public std::runtime_error {
public:
  remez_not_converged(std::string what, ApproxPolynomial last);
  const ApproxPolynomial& last_iterate() const noexcept { return last_; }

private:
  ApproxPolynomial last_;
};

/// Runs the Remez exchange for x log x on [0, 1] at the given degree.
///
/// degree = 1 returns the closed-form optimum: the constant polynomial
/// p(x) = -1/(2e) (the slope of the best affine fit vanishes because
/// x log x takes equal values at both endpoints), with sup error exactly
/// 1/(2e). Degrees 2..64 run the exchange with
/// equioscillation on degree+2 extrema, converging when the relative gap
/// between the observed sup residual and the leveled error drops below
/// 1e-10. Throws invalid_parameter for degree < 1 or degree > 64, and
/// remez_not_converged if 100 iterations do not reach the criterion.
ApproxPolynomial remez_xlogx(std::int64_t degree);

/// x log x with the continuous extension value 0 at x = 0.
double xlogx(double x);

} // namespace divrate
