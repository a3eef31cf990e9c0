#pragma once
// Asymptotic null-distribution p-values for all seven statistics.  The MIN2,
// MAX3 and CMAX tails are finite-range integrals over bivariate-normal
// densities, evaluated by the adaptive quadrature in special.hpp; the
// genotype-frequency inputs always come from the observed margins.

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "genassoc/special.hpp"
#include "genassoc/statistics.hpp"
#include "genassoc/table.hpp"

namespace genassoc {

// ============================================================================
// Genotype frequency estimates
// ============================================================================

/// Estimated genotype class frequencies (g0, g1, g2), normally the margin
/// proportions m_i / N.
struct GenotypeFreqEstimate {
  double g0 = 0.0, g1 = 0.0, g2 = 0.0;

  static GenotypeFreqEstimate from_margins(const Margins& m) {
    const double N = static_cast<double>(m.total());
    return {static_cast<double>(m.m0) / N, static_cast<double>(m.m1) / N,
            static_cast<double>(m.m2) / N};
  }
};

/// Raised when margin frequencies make the trend correlation degenerate:
/// g0 or g2 in {0,1}, or g1 = 0 (which drives rho to 1 and the bivariate
/// density singular).
class DegenerateFreqsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

namespace detail {

inline void require_valid_freqs(const GenotypeFreqEstimate& g) {
  if (g.g0 < 0.0 || g.g1 < 0.0 || g.g2 < 0.0 || std::fabs(g.g0 + g.g1 + g.g2 - 1.0) > 1e-12)
    throw std::domain_error("genotype frequencies must be non-negative and sum to 1");
  if (!(g.g0 > 0.0) || !(g.g0 < 1.0) || !(g.g2 > 0.0) || !(g.g2 < 1.0) || !(g.g1 > 0.0))
    throw DegenerateFreqsError("DEGENERATE_FREQS: trend correlation undefined for these margins");
}

}  // namespace detail

// ============================================================================
// Closed-form tails
// ============================================================================

/// Two-sided standard normal tail 2(1 - Phi(|v|)).
inline double p_catt(double v) { return 2.0 * norm_sf(std::fabs(v)); }

/// Chi-square(2 df) survival e^{-v/2}.
inline double p_pearson(double v) {
  if (v < 0.0) throw std::domain_error("p_pearson requires a non-negative statistic");
  return chisq2_sf(v);
}

/// MERT is asymptotically standard normal; two-sided tail.
inline double p_mert(double v) { return 2.0 * norm_sf(std::fabs(v)); }

// ============================================================================
// Integral tails
// ============================================================================

/// Pr(MIN2 <= t) in the asymptotic limit (free of the genotype frequencies):
///   t/2 + e^{-q/2}/2 - (1/2pi) Int_q^{-2 ln t} e^{-v/2} arcsin(2q/v - 1) dv,
/// q the (1-t) quantile of chi-square(1 df).  The substitution v = q + u^2
/// removes the square-root singularity of the arcsin at v = q; an empty range
/// (-2 ln t <= q, only approached as t -> 1) contributes 0.
inline double p_min2(double t, const QuadratureSpec& spec = {}) {
  if (!(t > 0.0) || t > 1.0) throw std::domain_error("p_min2 requires t in (0,1]");
  if (t == 1.0) return 1.0;
  const double q = chisq1_quantile(1.0 - t);
  const double upper = -2.0 * std::log(t);
  const double base = 0.5 * t + 0.5 * std::exp(-0.5 * q);
  if (upper <= q) return std::clamp(base, 0.0, 1.0);
  const auto integrand = [q](double u) {
    const double v = q + u * u;
    return 2.0 * u * std::exp(-0.5 * v) * std::asin(std::clamp(2.0 * q / v - 1.0, -1.0, 1.0));
  };
  const double integral = integrate(integrand, 0.0, std::sqrt(upper - q), spec);
  return std::clamp(base - integral / (2.0 * M_PI), 0.0, 1.0);
}

namespace detail {

/// P(|Z0| <= u and |Z1| <= u) for standard binormal (Z0, Z1) with
/// correlation rho: 2 Int_0^u phi(x)[Phi((u-rho x)/r) - Phi((-u-rho x)/r)] dx,
/// r = sqrt(1-rho^2).
template <class Spec>
inline double binormal_square_prob(double u, double rho, const Spec& spec) {
  if (u <= 0.0) return 0.0;
  const double r = std::sqrt(1.0 - rho * rho);
  const auto f = [u, rho, r](double x) {
    return norm_pdf(x) * (norm_cdf((u - rho * x) / r) - norm_cdf((-u - rho * x) / r));
  };
  return 2.0 * integrate(f, 0.0, u, spec);
}

}  // namespace detail

/// Pr(MAX3 >= t): with weights w0 = sqrt(g2(1-g2)/D), w1 = sqrt(g0(1-g0)/D),
/// D = g0(1-g0) + g2(1-g2) + 2 g0 g2 (so that CATT_1/2 -> w0 Z0 + w1 Z1) and
/// rho the CATT_0/CATT_1 correlation,
///   1 - 2 Int_0^a phi(x)[Phi((t-rho x)/r) - Phi((-t-rho x)/r)] dx
///     - 2 Int_a^t phi(x)[Phi(((t-w0 x)/w1 - rho x)/r) - Phi((-t-rho x)/r)] dx,
/// split point a = (1-w1) t / w0.  Since (w0+w1)^2 = 1 + 2 w0 w1 (1-rho) >= 1
/// the split point never exceeds t, but both integrals are evaluated as
/// signed ranges regardless.
inline double p_max3(double t, const GenotypeFreqEstimate& g, const QuadratureSpec& spec = {}) {
  detail::require_valid_freqs(g);
  if (t < 0.0) throw std::domain_error("p_max3 requires t >= 0");
  if (t == 0.0) return 1.0;
  const double v0 = g.g0 * (1.0 - g.g0), v2 = g.g2 * (1.0 - g.g2);
  const double D = v0 + v2 + 2.0 * g.g0 * g.g2;
  const double w0 = std::sqrt(v2 / D), w1 = std::sqrt(v0 / D);
  const double rho = catt_correlation(g.g0, g.g2);
  const double r = std::sqrt(1.0 - rho * rho);
  const double a = (1.0 - w1) * t / w0;
  const auto low = [t, rho, r](double x) {
    return norm_pdf(x) * (norm_cdf((t - rho * x) / r) - norm_cdf((-t - rho * x) / r));
  };
  const auto high = [t, rho, r, w0, w1](double x) {
    return norm_pdf(x) * (norm_cdf(((t - w0 * x) / w1 - rho * x) / r) - norm_cdf((-t - rho * x) / r));
  };
  const double inside = 2.0 * integrate(low, 0.0, a, spec) + 2.0 * integrate(high, a, t, spec);
  return std::clamp(1.0 - inside, 0.0, 1.0);
}

/// Pr(CMAX >= t) (shared by CLRT): the mixture
///   1 - w F(t) - (1-w) P(|Z0| <= sqrt t and |Z1| <= sqrt t)
/// with w = arccos(rho)/pi and F the chi-square(2 df) cdf.  Equivalently
/// w e^{-t/2} + (1-w) P(max(|Z0|,|Z1|) >= sqrt t).
inline double p_cmax(double t, const GenotypeFreqEstimate& g, const QuadratureSpec& spec = {}) {
  detail::require_valid_freqs(g);
  if (t < 0.0) throw std::domain_error("p_cmax requires t >= 0");
  if (t == 0.0) return 1.0;
  const double rho = catt_correlation(g.g0, g.g2);
  const double w = std::acos(rho) / M_PI;
  const double inside = w * chisq2_cdf(t) +
                        (1.0 - w) * detail::binormal_square_prob(std::sqrt(t), rho, spec);
  return std::clamp(1.0 - inside, 0.0, 1.0);
}

// ============================================================================
// Dispatch
// ============================================================================

/// Asymptotic p-value of a statistic on a table; frequency inputs for MAX3,
/// CMAX and CLRT are estimated from the margins.  Throws
/// DegenerateFreqsError when those margins degenerate.
inline double asymptotic_p(StatisticKind kind, const ContingencyTable& t,
                           const QuadratureSpec& spec = {}) {
  switch (kind) {
    case StatisticKind::CattHalf: return p_catt(catt(t, 0.5));
    case StatisticKind::Pearson:  return p_pearson(pearson(t));
    case StatisticKind::Min2: {
      const double v = min2_statistic(t);
      return v > 0.0 ? p_min2(v, spec) : 0.0;  // v = 0 only by tail underflow
    }
    case StatisticKind::Max3:
      return p_max3(max3(t), GenotypeFreqEstimate::from_margins(margins_of(t)), spec);
    case StatisticKind::Cmax:
      return p_cmax(cmax(t), GenotypeFreqEstimate::from_margins(margins_of(t)), spec);
    case StatisticKind::Clrt:
      return p_cmax(clrt(t), GenotypeFreqEstimate::from_margins(margins_of(t)), spec);
    case StatisticKind::Mert:     return p_mert(mert(t));
  }
  return 1.0;
}

}  // namespace genassoc
