#pragma once

// Extended-precision Mittag-Leffler oracle for tests. Sums the defining power
// series in MPFR with enough working bits to absorb the cancellation between
// terms (the largest term is about exp(|z|^{1/alpha})).

#include <mpfr.h>

#include <cmath>
#include <stdexcept>

namespace fracctl::testing {

class MpfrScalar {
 public:
  explicit MpfrScalar(mpfr_prec_t bits) { mpfr_init2(v_, bits); }
  ~MpfrScalar() { mpfr_clear(v_); }
  MpfrScalar(const MpfrScalar&) = delete;
  MpfrScalar& operator=(const MpfrScalar&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

/// E_{alpha,beta}(z) by the power series in extended precision. alpha, beta
/// and z are taken as exact binary doubles.
inline double ml_series_oracle(double alpha, double beta, double z) {
  const double radius = std::pow(std::abs(z), 1.0 / alpha);
  if (radius > 20000.0) throw std::domain_error("oracle: argument too large for series");
  // The largest term is ~e^radius and the result can be as small as
  // ~e^-radius (alpha = 1), so budget twice that plus guard bits.
  const auto bits = static_cast<mpfr_prec_t>(2.0 * radius / std::log(2.0) + 192.0);

  MpfrScalar sum(bits), term(bits), power(bits), arg(bits), gam(bits), zz(bits), tol(bits);
  mpfr_set_d(zz.get(), z, MPFR_RNDN);
  mpfr_set_ui(sum.get(), 0, MPFR_RNDN);
  mpfr_set_ui(power.get(), 1, MPFR_RNDN);
  for (long n = 0;; ++n) {
    mpfr_set_d(arg.get(), alpha, MPFR_RNDN);
    mpfr_mul_si(arg.get(), arg.get(), n, MPFR_RNDN);
    mpfr_add_d(arg.get(), arg.get(), beta, MPFR_RNDN);
    if (mpfr_integer_p(arg.get()) && mpfr_sgn(arg.get()) <= 0) {
      mpfr_set_ui(term.get(), 0, MPFR_RNDN);
    } else {
      mpfr_gamma(gam.get(), arg.get(), MPFR_RNDN);
      mpfr_div(term.get(), power.get(), gam.get(), MPFR_RNDN);
    }
    mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    const double argd = mpfr_get_d(arg.get(), MPFR_RNDN);
    if (argd > radius + 10.0) {
      mpfr_abs(tol.get(), sum.get(), MPFR_RNDN);
      mpfr_mul_d(tol.get(), tol.get(), 1e-30, MPFR_RNDN);
      mpfr_abs(term.get(), term.get(), MPFR_RNDN);
      if (mpfr_cmp(term.get(), tol.get()) < 0) break;
    }
    mpfr_mul(power.get(), power.get(), zz.get(), MPFR_RNDN);
    if (n > 2000000) throw std::runtime_error("oracle: series did not converge");
  }
  return mpfr_get_d(sum.get(), MPFR_RNDN);
}

}  // namespace fracctl::testing
