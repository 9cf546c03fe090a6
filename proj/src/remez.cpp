#include "divrate/remez.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace divrate {
namespace {

constexpr int kGridPoints = 100000;  // certification grid resolution
constexpr int kMaxIterations = 100;
constexpr double kConvergenceTol = 1e-10;

long double xlogx_ld(long double x) {
  return x <= 0.0L ? 0.0L : x * std::log(x);
}

// Clenshaw recurrence for a shifted-Chebyshev series on [0, 1].
long double cheb_eval(const std::vector<double>& c, long double x) {
  long double u = 2.0L * x - 1.0L;
  long double b1 = 0.0L, b2 = 0.0L;
  for (std::size_t j = c.size(); j-- > 1;) {
    long double b0 = static_cast<long double>(c[j]) + 2.0L * u * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return static_cast<long double>(c[0]) + u * b1 - b2;
}

long double residual(const std::vector<double>& c, long double x) {
  return xlogx_ld(x) - cheb_eval(c, x);
}

// Monomial coefficients (in x, ascending) of the shifted-Chebyshev series.
// Built by the T*_{j+1} = 2(2x-1) T*_j - T*_{j-1} recurrence in extended
// precision; exercised boundaries only (downstream use stays at small L
// where the conversion is benign, per the header contract).
std::vector<double> cheb_to_monomial(const std::vector<double>& c) {
  std::size_t n = c.size();
  std::vector<std::vector<long double>> t(n);
  t[0] = {1.0L};
  if (n > 1) t[1] = {-1.0L, 2.0L};
  for (std::size_t j = 2; j < n; ++j) {
    t[j].assign(j + 1, 0.0L);
    for (std::size_t i = 0; i <= j - 1; ++i) {
      t[j][i] += -2.0L * t[j - 1][i];
      t[j][i + 1] += 4.0L * t[j - 1][i];
    }
    for (std::size_t i = 0; i < t[j - 2].size(); ++i) t[j][i] -= t[j - 2][i];
  }
  std::vector<long double> acc(n, 0.0L);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < t[j].size(); ++i)
      acc[i] += static_cast<long double>(c[j]) * t[j][i];
  return std::vector<double>(acc.begin(), acc.end());
}

struct Extremum {
  double x;
  double value; // signed residual at x
};

// Maximizes sign * residual on [lo, hi] by golden-section search. The
// target has a vanishing derivative at 0 only through x log x, which makes
// derivative-based refinement unreliable; golden section needs nothing.
Extremum golden_refine(const std::vector<double>& c, double lo, double hi,
                       double sign) {
  const double invphi = 0.6180339887498948482;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  long double f1 = sign * residual(c, x1);
  long double f2 = sign * residual(c, x2);
  for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = sign * residual(c, x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = sign * residual(c, x2);
    }
  }
  double xm = 0.5 * (a + b);
  return {xm, static_cast<double>(residual(c, xm))};
}

// Keeps the sequence sign-alternating by collapsing same-sign neighbours to
// the larger magnitude, then trims smallest magnitudes down to `target`.
std::vector<Extremum> alternating_trim(std::vector<Extremum> pts,
                                       std::size_t target) {
  auto collapse = [&]() {
    std::vector<Extremum> out;
    for (const auto& e : pts) {
      if (!out.empty() && (out.back().value < 0) == (e.value < 0)) {
        if (std::abs(e.value) > std::abs(out.back().value)) out.back() = e;
      } else {
        out.push_back(e);
      }
    }
    pts = std::move(out);
  };
  collapse();
  while (pts.size() > target) {
    std::size_t drop = 0;
    for (std::size_t i = 1; i < pts.size(); ++i)
      if (std::abs(pts[i].value) < std::abs(pts[drop].value)) drop = i;
    pts.erase(pts.begin() + static_cast<std::ptrdiff_t>(drop));
    collapse();
  }
  return pts;
}

ApproxPolynomial build_polynomial(const std::vector<double>& cheb,
                                  double sup_error) {
  return ApproxPolynomial(cheb_to_monomial(cheb), cheb, sup_error);
}

} // namespace

ApproxPolynomial::ApproxPolynomial(std::vector<double> monomial,
                                   std::vector<double> chebyshev,
                                   double sup_error)
    : monomial_(std::move(monomial)), chebyshev_(std::move(chebyshev)),
      sup_error_(sup_error) {
  if (monomial_.empty() || monomial_.size() != chebyshev_.size())
    throw invalid_parameter("ApproxPolynomial: inconsistent coefficients");
  if (!(sup_error_ >= 0.0))
    throw invalid_parameter("ApproxPolynomial: sup_error must be >= 0");
}

double ApproxPolynomial::evaluate(double x) const {
  return static_cast<double>(cheb_eval(chebyshev_, x));
}

remez_not_converged::remez_not_converged(std::string what,
                                         ApproxPolynomial last)
    : std::runtime_error(std::move(what)), last_(std::move(last)) {}

double xlogx(double x) {
  return x <= 0.0 ? 0.0 : x * std::log(x);
}

ApproxPolynomial remez_xlogx(std::int64_t degree) {
  if (degree < 1 || degree > 64)
    throw invalid_parameter("remez_xlogx: degree must lie in [1, 64]");

  if (degree == 1) {
    // Closed form: e'(x) = log x + 1 - b vanishes once, so the alternation
    // set is {0, e^{b-1}, 1}; equal endpoint errors force slope b = 0 and
    // then a = -1/(2e) levels the three errors at 1/(2e).
    double a0 = -1.0 / (2.0 * std::exp(1.0));
    return ApproxPolynomial({a0, 0.0}, {a0, 0.0}, -a0);
  }

  const std::size_t L = static_cast<std::size_t>(degree);
  const std::size_t n_ref = L + 2;

  // Certification grid, Chebyshev-distributed so the x ~ 0 region where
  // x log x bends hardest is densely covered.
  std::vector<double> grid(kGridPoints + 1);
  for (int g = 0; g <= kGridPoints; ++g)
    grid[static_cast<std::size_t>(g)] =
        0.5 * (1.0 - std::cos(M_PI * g / kGridPoints));

  // Initial reference: Chebyshev extrema mapped to [0, 1].
  std::vector<double> ref(n_ref);
  for (std::size_t i = 0; i < n_ref; ++i)
    ref[i] = 0.5 * (1.0 - std::cos(M_PI * static_cast<double>(i) /
                                   static_cast<double>(n_ref - 1)));

  std::vector<double> cheb(L + 1, 0.0);
  double leveled = 0.0;
  double sup = 0.0;

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    // Leveled-error system: p(x_i) + (-1)^i h = f(x_i) in the shifted-
    // Chebyshev basis, which stays well-conditioned at high degree.
    Eigen::MatrixXd A(n_ref, n_ref);
    Eigen::VectorXd rhs(n_ref);
    for (std::size_t i = 0; i < n_ref; ++i) {
      double u = 2.0 * ref[i] - 1.0;
      double tkm1 = 1.0, tk = u;
      A(i, 0) = 1.0;
      if (L >= 1) A(i, 1) = u;
      for (std::size_t j = 2; j <= L; ++j) {
        double t = 2.0 * u * tk - tkm1;
        A(i, j) = t;
        tkm1 = tk;
        tk = t;
      }
      A(i, n_ref - 1) = (i % 2 == 0) ? 1.0 : -1.0;
      rhs(i) = static_cast<double>(xlogx_ld(ref[i]));
    }
    Eigen::VectorXd sol = A.colPivHouseholderQr().solve(rhs);
    for (std::size_t j = 0; j <= L; ++j) cheb[j] = sol(j);
    leveled = sol(n_ref - 1);

    // Locate residual extrema: grid scan for local maxima of |r|, then
    // golden-section refinement inside each bracketing cell.
    std::vector<long double> r(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g)
      r[g] = residual(cheb, grid[g]);

    std::vector<Extremum> ext;
    for (std::size_t g = 0; g < grid.size(); ++g) {
      long double m = std::abs(r[g]);
      bool left_ok = g == 0 || std::abs(r[g - 1]) <= m;
      bool right_ok = g + 1 == grid.size() || std::abs(r[g + 1]) <= m;
      if (!left_ok || !right_ok) continue;
      double lo = g == 0 ? grid[0] : grid[g - 1];
      double hi = g + 1 == grid.size() ? grid.back() : grid[g + 1];
      double sign = r[g] < 0.0L ? -1.0 : 1.0;
      ext.push_back(golden_refine(cheb, lo, hi, sign));
    }
    std::sort(ext.begin(), ext.end(),
              [](const Extremum& a, const Extremum& b) { return a.x < b.x; });

    std::vector<Extremum> alt = alternating_trim(std::move(ext), n_ref);
    if (alt.size() < n_ref) {
      // Rare stall: rebuild the candidate set from both the located
      // extrema and the current reference, then trim again.
      std::vector<Extremum> merged = std::move(alt);
      for (double x : ref)
        merged.push_back({x, static_cast<double>(residual(cheb, x))});
      std::sort(merged.begin(), merged.end(),
                [](const Extremum& a, const Extremum& b) { return a.x < b.x; });
      alt = alternating_trim(std::move(merged), n_ref);
      if (alt.size() < n_ref)
        throw remez_not_converged(
            "remez_xlogx: could not assemble " + std::to_string(n_ref) +
                " alternating extrema at degree " + std::to_string(degree),
            build_polynomial(cheb, 0.0));
    }

    sup = 0.0;
    for (const auto& e : alt) sup = std::max(sup, std::abs(e.value));
    double gap = (sup - std::abs(leveled)) /
                 std::max(std::abs(leveled), 1e-300);
    if (gap < kConvergenceTol) {
      ApproxPolynomial out = build_polynomial(cheb, sup);
      // Solver sanity bound on coefficient growth (|a_j| <= 2/e * 8^L).
      double guard = (2.0 / std::exp(1.0)) *
                     std::pow(2.0, 3.0 * static_cast<double>(L));
      for (std::size_t j = 0; j <= L; ++j)
        if (std::abs(out.coeffs()[j]) > guard)
          throw remez_not_converged(
              "remez_xlogx: coefficient magnitude guard violated at degree " +
                  std::to_string(degree),
              out);
      return out;
    }

    for (std::size_t i = 0; i < n_ref; ++i) ref[i] = alt[i].x;
  }

  throw remez_not_converged(
      "remez_xlogx: no convergence after " + std::to_string(kMaxIterations) +
          " iterations at degree " + std::to_string(degree),
      build_polynomial(cheb, sup));
}

} // namespace divrate
