#include "fracctl/fraccore.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "fracctl/errors.hpp"

namespace fracctl {

FractionalOrder::FractionalOrder(double alpha) : alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw DomainError(fmt::format("fractional order must lie in (0, 1], got {}", alpha));
  }
}

namespace {

using cplx = std::complex<double>;

// Series is used while |z|^{1/alpha} <= kSeriesRadius: the largest term is then
// about e^5, so long double accumulation keeps ~1e-15 relative accuracy.
constexpr double kSeriesRadius = 5.0;
// Beyond this radius (negative axis, alpha <= 1) the asymptotic expansion
// truncation error is below e^{-60}.
constexpr double kAsymptoticRadius = 60.0;
constexpr int kMaxSeriesTerms = 4000;

double rgamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

double ml_series(double alpha, double beta, double z) {
  const long double zl = z;
  const long double radius = std::pow(std::abs(z), 1.0 / alpha);
  long double sum = 0.0L;
  long double power = 1.0L;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    const long double arg = static_cast<long double>(alpha) * n + beta;
    const long double term = power / std::tgamma(arg);
    sum += term;
    if (arg > radius + 2.0L && std::abs(term) <= 1e-21L * std::abs(sum)) break;
    power *= zl;
  }
  return static_cast<double>(sum);
}

// E_{alpha,beta}(z) ~ -sum_{k>=1} z^{-k} / Gamma(beta - alpha k) for z -> -inf,
// 0 < alpha <= 1. Truncated near the smallest term of the smooth envelope
// |z|^{-k} Gamma(alpha k + 1 - beta) / pi; 1/Gamma itself has zeros and
// cannot be used to detect the turning point.
double ml_asymptotic(double alpha, double beta, double z) {
  const double log_abs_z = std::log(-z);
  double sum = 0.0;
  double previous_envelope = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 200000; ++k) {
    const double term = -std::pow(z, -k) * rgamma(beta - alpha * k);
    sum += term;
    const double log_envelope = std::lgamma(std::max(alpha * k + 1.0 - beta, 2.0)) - k * log_abs_z;
    if (k > 1 && log_envelope > previous_envelope) break;
    previous_envelope = log_envelope;
    if (sum != 0.0 && log_envelope < std::log(1e-18 * std::abs(sum))) break;
  }
  return sum;
}

struct ContourParams {
  double mu = 0.0;
  double h = 0.0;
  double n = std::numeric_limits<double>::infinity();
};

const double kLogMachineEps = std::log(std::numeric_limits<double>::epsilon());

// Optimal parabolic contour parameters for a region bounded by two
// singularities (bounded-region case).
ContourParams optimal_bounded(double t, double phi_j, double phi_j1, double p, double q,
                              double log_epsilon) {
  constexpr double fac = 1.01;
  const double f_max = std::exp(log_epsilon - kLogMachineEps);
  const double sq_phi_j = std::sqrt(phi_j);
  const double threshold = 2.0 * std::sqrt((log_epsilon - kLogMachineEps) / t);
  const double sq_phi_j1 = std::min(std::sqrt(phi_j1), threshold - sq_phi_j);

  double sq_bar_j = 0.0;
  double sq_bar_j1 = 0.0;
  double f_bar = 1.0;
  bool admissible = false;

  if (p < 1e-14 && q < 1e-14) {
    sq_bar_j = sq_phi_j;
    sq_bar_j1 = sq_phi_j1;
    admissible = true;
  } else if (p < 1e-14) {
    sq_bar_j = sq_phi_j;
    const double f_min = sq_phi_j > 0.0 ? fac * std::pow(sq_phi_j / (sq_phi_j1 - sq_phi_j), q) : fac;
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fq = std::pow(f_bar, -1.0 / q);
      sq_bar_j1 = (2.0 * sq_phi_j1 - fq * sq_phi_j) / (2.0 + fq);
      admissible = true;
    }
  } else if (q < 1e-14) {
    sq_bar_j1 = sq_phi_j1;
    const double f_min = fac * std::pow(sq_phi_j1 / (sq_phi_j1 - sq_phi_j), p);
    if (f_min < f_max) {
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / p);
      sq_bar_j = (2.0 * sq_phi_j + fp * sq_phi_j1) / (2.0 - fp);
      admissible = true;
    }
  } else {
    double f_min = fac * (sq_phi_j + sq_phi_j1) / std::pow(sq_phi_j1 - sq_phi_j, std::max(p, q));
    if (f_min < f_max) {
      f_min = std::max(f_min, 1.5);
      f_bar = f_min + f_min / f_max * (f_max - f_min);
      const double fp = std::pow(f_bar, -1.0 / p);
      const double fq = std::pow(f_bar, -1.0 / q);
      const double w = -phi_j1 * t / log_epsilon;
      const double den = 2.0 + w - (1.0 + w) * fp + fq;
      sq_bar_j = ((2.0 + w + fq) * sq_phi_j + fp * sq_phi_j1) / den;
      sq_bar_j1 = (-(1.0 + w) * fq * sq_phi_j + (2.0 + w - (1.0 + w) * fp) * sq_phi_j1) / den;
      admissible = true;
    }
  }

  ContourParams out;
  if (!admissible) return out;
  const double log_eps_bar = log_epsilon - std::log(f_bar);
  const double w = -sq_bar_j1 * sq_bar_j1 * t / log_eps_bar;
  const double mu_root = ((1.0 + w) * sq_bar_j + sq_bar_j1) / (2.0 + w);
  out.mu = mu_root * mu_root;
  out.h = -2.0 * std::numbers::pi / log_eps_bar * (sq_bar_j1 - sq_bar_j) /
          ((1.0 + w) * sq_bar_j + sq_bar_j1);
  out.n = std::ceil(std::sqrt(1.0 - log_eps_bar / t / out.mu) / out.h);
  return out;
}

// Optimal parabolic contour parameters for the unbounded region to the right
// of the last singularity.
ContourParams optimal_unbounded(double t, double phi_j, double p, double log_epsilon) {
  const double sq_phi_j = std::sqrt(phi_j);
  double phibar = phi_j > 0.0 ? phi_j * 1.01 : 0.01;
  double sq_phibar = std::sqrt(phibar);
  constexpr double f_min = 1.0;
  constexpr double f_max = 10.0;
  constexpr double f_tar = 5.0;

  double n = 0.0;
  double a = 0.0;
  double sq_mu = 0.0;
  for (int guard = 0; guard < 100; ++guard) {
    const double phi_t = phibar * t;
    const double log_eps_phi_t = log_epsilon / phi_t;
    n = std::ceil(phi_t / std::numbers::pi *
                  (1.0 - 1.5 * log_eps_phi_t + std::sqrt(1.0 - 2.0 * log_eps_phi_t)));
    a = std::numbers::pi * n / phi_t;
    sq_mu = sq_phibar * std::abs(4.0 - a) / std::abs(7.0 - std::sqrt(1.0 + 12.0 * a));
    const double f_bar = std::pow((sq_phibar - sq_phi_j) / sq_mu, -p);
    if (p < 1e-14 || (f_min < f_bar && f_bar < f_max)) break;
    sq_phibar = std::pow(f_tar, -1.0 / p) * sq_mu + sq_phi_j;
    phibar = sq_phibar * sq_phibar;
  }

  ContourParams out;
  out.mu = sq_mu * sq_mu;
  out.h = (-3.0 * a - 2.0 + 2.0 * std::sqrt(1.0 + 12.0 * a)) / (4.0 - a) / n;
  out.n = n;

  const double threshold = (log_epsilon - kLogMachineEps) / t;
  if (out.mu > threshold) {
    const double shift = std::abs(p) < 1e-14 ? 0.0 : std::pow(f_tar, -1.0 / p) * std::sqrt(out.mu);
    const double phibar_star = (shift + sq_phi_j) * (shift + sq_phi_j);
    if (phibar_star < threshold) {
      const double w = std::sqrt(kLogMachineEps / (kLogMachineEps - log_epsilon));
      const double u = std::sqrt(-phibar_star * t / kLogMachineEps);
      out.mu = threshold;
      out.n = std::ceil(w * log_epsilon / 2.0 / std::numbers::pi / (u * w - 1.0));
      out.h = w / out.n;
    } else {
      out.n = std::numeric_limits<double>::infinity();
      out.h = 0.0;
    }
  }
  return out;
}

// Inverse Laplace transform of s^{alpha-beta} / (s^alpha - z) at t = 1 along an
// optimal parabolic contour, plus residues of the poles left of the contour.
double ml_contour(double alpha, double beta, double z) {
  constexpr double t = 1.0;
  double log_epsilon = std::log(1e-15);

  const double theta = z < 0.0 ? std::numbers::pi : 0.0;
  const double abs_z = std::abs(z);
  const int k_min = static_cast<int>(std::ceil(-alpha / 2.0 - theta / (2.0 * std::numbers::pi)));
  const int k_max = static_cast<int>(std::floor(alpha / 2.0 - theta / (2.0 * std::numbers::pi)));

  struct Singularity {
    cplx s;
    double phi;
  };
  std::vector<Singularity> poles;
  for (int k = k_min; k <= k_max; ++k) {
    const cplx s = std::pow(abs_z, 1.0 / alpha) *
                   std::exp(cplx(0.0, (theta + 2.0 * k * std::numbers::pi) / alpha));
    const double phi = (s.real() + std::abs(s)) / 2.0;
    if (phi > 1e-15) poles.push_back({s, phi});
  }
  std::sort(poles.begin(), poles.end(),
            [](const Singularity& a, const Singularity& b) { return a.phi < b.phi; });

  // Singularities ordered by phi, starting with the branch point at 0.
  std::vector<cplx> s_star{cplx(0.0)};
  std::vector<double> phi_star{0.0};
  for (const auto& pole : poles) {
    s_star.push_back(pole.s);
    phi_star.push_back(pole.phi);
  }
  const std::size_t regions = s_star.size();
  std::vector<double> p(regions, 1.0);
  std::vector<double> q(regions, 1.0);
  p[0] = std::max(0.0, -2.0 * (alpha - beta + 1.0));
  q[regions - 1] = std::numeric_limits<double>::infinity();
  phi_star.push_back(std::numeric_limits<double>::infinity());

  std::vector<std::size_t> admissible;
  for (std::size_t j = 0; j < regions; ++j) {
    if (phi_star[j] < (log_epsilon - kLogMachineEps) / t && phi_star[j] < phi_star[j + 1]) {
      admissible.push_back(j);
    }
  }

  ContourParams best;
  std::size_t best_region = 0;
  for (int relax = 0; relax < 10; ++relax) {
    best = ContourParams{};
    for (std::size_t j : admissible) {
      const ContourParams params =
          j + 1 < regions ? optimal_bounded(t, phi_star[j], phi_star[j + 1], p[j], q[j], log_epsilon)
                          : optimal_unbounded(t, phi_star[j], p[j], log_epsilon);
      if (params.n < best.n) {
        best = params;
        best_region = j;
      }
    }
    if (best.n <= 200.0) break;
    log_epsilon += std::log(10.0);
  }
  if (!std::isfinite(best.n)) {
    throw DomainError(fmt::format("Mittag-Leffler contour selection failed for alpha={} beta={} z={}",
                                  alpha, beta, z));
  }

  const int n = static_cast<int>(best.n);
  cplx integral(0.0);
  for (int k = -n; k <= n; ++k) {
    const double u = best.h * k;
    const cplx s = best.mu * (cplx(1.0, u) * cplx(1.0, u));
    const cplx ds = cplx(-2.0 * best.mu * u, 2.0 * best.mu);
    const cplx f = std::pow(s, alpha - beta) / (std::pow(s, alpha) - z) * ds;
    integral += std::exp(s * t) * f;
  }
  integral *= best.h / (2.0 * std::numbers::pi * cplx(0.0, 1.0));

  cplx residues(0.0);
  for (std::size_t j = best_region + 1; j < regions; ++j) {
    residues += (1.0 / alpha) * std::pow(s_star[j], 1.0 - beta) * std::exp(s_star[j] * t);
  }
  return (integral + residues).real();
}

}  // namespace

namespace {

void check_ml_arguments(double alpha, double beta, double z) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw DomainError(fmt::format("ml_eval: alpha must lie in (0, 2], got {}", alpha));
  }
  if (!(beta > 0.0 && beta <= 3.0)) {
    throw DomainError(fmt::format("ml_eval: beta must lie in (0, 3], got {}", beta));
  }
  if (!std::isfinite(z)) throw DomainError("ml_eval: non-finite argument");
  if (std::abs(z) > kMittagLefflerZMax) {
    throw DomainError(fmt::format("ml_eval: |z| = {} exceeds supported range", std::abs(z)));
  }
}

}  // namespace

double ml_eval(double alpha, double beta, double z) {
  check_ml_arguments(alpha, beta, z);
  if (alpha == 1.0 && beta == 1.0) return std::exp(z);
  if (alpha == 1.0 && beta == 2.0 && z != 0.0) return std::expm1(z) / z;
  return ml_eval_general(alpha, beta, z);
}

double ml_eval_general(double alpha, double beta, double z) {
  check_ml_arguments(alpha, beta, z);
  if (z == 0.0) return rgamma(beta);
  const double radius = std::pow(std::abs(z), 1.0 / alpha);
  if (radius <= kSeriesRadius) return ml_series(alpha, beta, z);
  if (z < 0.0 && alpha <= 1.0 && radius >= kAsymptoticRadius) return ml_asymptotic(alpha, beta, z);
  return ml_contour(alpha, beta, z);
}

WeightTable gl_weights(FractionalOrder alpha, std::size_t n) {
  WeightTable table{WeightKind::GrunwaldLetnikov, alpha, {}};
  table.values.resize(n + 1);
  table.values[0] = 1.0;
  const double a1 = alpha.value() + 1.0;
  for (std::size_t j = 1; j <= n; ++j) {
    table.values[j] = table.values[j - 1] * (1.0 - a1 / static_cast<double>(j));
  }
  return table;
}

WeightTable l1_weights(FractionalOrder alpha, std::size_t n) {
  if (alpha.classical()) {
    throw DomainError("l1_weights: alpha = 1 is degenerate; use classical stepping");
  }
  if (n == 0) throw DomainError("l1_weights: need at least one weight");
  WeightTable table{WeightKind::L1, alpha, {}};
  table.values.resize(n);
  const double e = 1.0 - alpha.value();
  double previous = 0.0;  // j^{1-alpha} at j = 0
  for (std::size_t j = 0; j < n; ++j) {
    const double next = std::pow(static_cast<double>(j + 1), e);
    table.values[j] = next - previous;
    previous = next;
  }
  return table;
}

namespace {

void require_history(std::span<const double> history, double dt, const char* who) {
  if (history.size() < 2) {
    throw DomainError(fmt::format("{}: history needs at least two samples", who));
  }
  if (!(dt > 0.0)) throw DomainError(fmt::format("{}: dt must be positive", who));
}

}  // namespace

double caputo_l1_apply(std::span<const double> history, double dt, FractionalOrder alpha) {
  require_history(history, dt, "caputo_l1_apply");
  const std::size_t n = history.size() - 1;
  if (alpha.classical()) return (history[n] - history[n - 1]) / dt;

  const WeightTable b = l1_weights(alpha, n);
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    sum += (history[j + 1] - history[j]) * b.values[n - 1 - j];
  }
  return sum / (std::tgamma(2.0 - alpha.value()) * std::pow(dt, alpha.value()));
}

double caputo_gl_apply(std::span<const double> history, double dt, FractionalOrder alpha) {
  require_history(history, dt, "caputo_gl_apply");
  const std::size_t n = history.size() - 1;
  const WeightTable w = gl_weights(alpha, n);
  double sum = 0.0;
  for (std::size_t j = 0; j <= n; ++j) sum += w.values[j] * (history[n - j] - history[0]);
  return sum / std::pow(dt, alpha.value());
}

double fractional_integral(std::span<const double> samples, double dt, double alpha) {
  if (samples.empty()) throw DomainError("fractional_integral: empty samples");
  if (!(dt > 0.0)) throw DomainError("fractional_integral: dt must be positive");
  if (!(alpha > 0.0)) throw DomainError("fractional_integral: alpha must be positive");
  const std::size_t n = samples.size() - 1;
  const double t_n = static_cast<double>(n) * dt;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double left = t_n - static_cast<double>(j) * dt;
    const double right = t_n - static_cast<double>(j + 1) * dt;
    sum += samples[j] * (std::pow(left, alpha) - std::pow(std::max(right, 0.0), alpha));
  }
  return sum / std::tgamma(alpha + 1.0);
}

}  // namespace fracctl
