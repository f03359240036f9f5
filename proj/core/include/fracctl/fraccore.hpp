#pragma once

// Fractional-calculus kernels: Mittag-Leffler evaluation, Grunwald-Letnikov
// and L1 weights, discrete Caputo operators and the Riemann-Liouville
// fractional integral on uniform grids.

#include <cstddef>
#include <span>
#include <vector>

namespace fracctl {

/// Order of a Caputo derivative, 0 < alpha <= 1.
///
/// alpha == 1 is the classical limit; operators that are singular there
/// either refuse it or reduce to their first-order counterpart.
class FractionalOrder {
 public:
  explicit FractionalOrder(double alpha);

  double value() const noexcept { return alpha_; }
  bool classical() const noexcept { return alpha_ == 1.0; }

  friend bool operator==(FractionalOrder, FractionalOrder) = default;

 private:
  double alpha_;
};

enum class WeightKind { GrunwaldLetnikov, L1 };

struct WeightTable {
  WeightKind kind;
  FractionalOrder alpha;
  std::vector<double> values;
};

/// Largest |z| accepted by ml_eval. Large positive arguments overflow to +inf.
inline constexpr double kMittagLefflerZMax = 1e12;

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for real z.
///
/// Accepts alpha in (0, 2] and beta in (0, 3]. Uses a power series near the
/// origin, the asymptotic expansion far out on the negative axis (alpha <= 1)
/// and inversion of the Laplace transform on an optimal parabolic contour
/// elsewhere. E_{1,1} and E_{1,2} are evaluated in closed form: they are
/// exponentially small on the negative axis, where the contour is only
/// accurate relative to 1. Relative accuracy is better than 1e-10 on the
/// supported range. Throws DomainError for parameters outside that range or
/// non-finite z.
double ml_eval(double alpha, double beta, double z);

/// ml_eval without the closed forms. Error is below about 1e-13 max(1, |E|).
double ml_eval_general(double alpha, double beta, double z);

/// Grunwald-Letnikov weights w_0..w_n, w_j = (-1)^j binom(alpha, j), by the
/// recurrence w_j = w_{j-1} (1 - (alpha + 1) / j).
WeightTable gl_weights(FractionalOrder alpha, std::size_t n);

/// L1 weights b_j = (j+1)^{1-alpha} - j^{1-alpha}, j = 0..n-1.
/// Rejects alpha == 1 and n == 0.
WeightTable l1_weights(FractionalOrder alpha, std::size_t n);

/// L1 approximation of the Caputo derivative at t_n from samples phi^0..phi^n.
/// At alpha == 1 this is the backward difference (phi^n - phi^{n-1}) / dt.
double caputo_l1_apply(std::span<const double> history, double dt, FractionalOrder alpha);

/// Grunwald-Letnikov approximation of the Caputo derivative at t_n, applied to
/// phi - phi^0 so that constants map to zero.
double caputo_gl_apply(std::span<const double> history, double dt, FractionalOrder alpha);

/// Riemann-Liouville integral I^alpha phi (t_n) by product integration of a
/// piecewise-constant (left endpoint) interpolant against the exact kernel.
double fractional_integral(std::span<const double> samples, double dt, double alpha);

}  // namespace fracctl
