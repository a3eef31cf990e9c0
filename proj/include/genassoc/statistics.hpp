#pragma once
// The seven association test statistics on a single 2x3 table, with explicit
// conventions for degenerate inputs.  All functions are pure; two-sided
// reporting (absolute values for the trend statistics) is handled by
// evaluate().

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string_view>

#include "genassoc/special.hpp"
#include "genassoc/table.hpp"

namespace genassoc {

// ============================================================================
// Statistic kinds
// ============================================================================

enum class StatisticKind { CattHalf, Pearson, Min2, Max3, Cmax, Clrt, Mert };

inline constexpr std::array<StatisticKind, 7> kAllStatistics = {
    StatisticKind::CattHalf, StatisticKind::Pearson, StatisticKind::Min2,
    StatisticKind::Max3,     StatisticKind::Cmax,    StatisticKind::Clrt,
    StatisticKind::Mert};
inline constexpr std::size_t kStatisticCount = 7;

constexpr std::size_t statistic_index(StatisticKind k) { return static_cast<std::size_t>(k); }

/// MIN2 is a minimum of p-values, so small values reject; every other
/// statistic rejects for large values.
enum class RejectionDirection { LargeRejects, SmallRejects };

constexpr RejectionDirection rejection_direction(StatisticKind k) {
  return k == StatisticKind::Min2 ? RejectionDirection::SmallRejects
                                  : RejectionDirection::LargeRejects;
}

constexpr const char* statistic_name(StatisticKind k) {
  switch (k) {
    case StatisticKind::CattHalf: return "catt_half";
    case StatisticKind::Pearson:  return "pearson";
    case StatisticKind::Min2:     return "min2";
    case StatisticKind::Max3:     return "max3";
    case StatisticKind::Cmax:     return "cmax";
    case StatisticKind::Clrt:     return "clrt";
    case StatisticKind::Mert:     return "mert";
  }
  return "?";
}

inline std::optional<StatisticKind> parse_statistic_kind(std::string_view name) {
  for (StatisticKind k : kAllStatistics)
    if (name == statistic_name(k)) return k;
  return std::nullopt;
}

// ============================================================================
// Trend and Pearson statistics
// ============================================================================

/// Cochran-Armitage trend statistic with scores (0, s, 1), signed:
///   CATT_s = sum_i s_i (n2 x_i - n1 y_i) / sqrt(n1 n2 (sum s_i^2 m_i - (sum s_i m_i)^2 / N)).
/// The numerator simplifies to N(s x1 + x2) - n1(s m1 + m2).  A zero variance
/// term (margins concentrated on one score) returns 0: such tables carry no
/// trend information.
inline double catt(const ContingencyTable& t, double s) {
  const Margins m = margins_of(t);
  const double N = static_cast<double>(m.total());
  const double sm = s * static_cast<double>(m.m1) + static_cast<double>(m.m2);
  const double num = N * (s * static_cast<double>(t.x1) + static_cast<double>(t.x2)) -
                     static_cast<double>(m.n1) * sm;
  const double var = static_cast<double>(m.n1) * static_cast<double>(m.n2) *
                     (s * s * static_cast<double>(m.m1) + static_cast<double>(m.m2) - sm * sm / N);
  if (!(var > 0.0)) return 0.0;
  return num / std::sqrt(var);
}

/// Pearson chi-square over the six cells, expected counts m_i * n_row / N;
/// columns with m_i = 0 contribute nothing.
inline double pearson(const ContingencyTable& t) {
  const Margins m = margins_of(t);
  const double N = static_cast<double>(m.total());
  const std::int64_t xs[3] = {t.x0, t.x1, t.x2};
  const std::int64_t ys[3] = {t.y0, t.y1, t.y2};
  const std::int64_t ms[3] = {m.m0, m.m1, m.m2};
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (ms[i] == 0) continue;
    const double ex = static_cast<double>(ms[i]) * static_cast<double>(m.n1) / N;
    const double ey = static_cast<double>(ms[i]) * static_cast<double>(m.n2) / N;
    const double dx = static_cast<double>(xs[i]) - ex;
    const double dy = static_cast<double>(ys[i]) - ey;
    sum += dx * dx / ex + dy * dy / ey;
  }
  return sum;
}

/// Data-driven score s = (x1/m1 - x0/m0) / (x2/m2 - x0/m0), the s maximizing
/// CATT_s^2.  Evaluated through exact integer cross-products; returns nullopt
/// (UNDEFINED) when any m_i = 0 or the denominator vanishes.
inline std::optional<double> data_driven_score(const ContingencyTable& t) {
  const Margins m = margins_of(t);
  if (m.m0 == 0 || m.m1 == 0 || m.m2 == 0) return std::nullopt;
  const std::int64_t num = m.m2 * (t.x1 * m.m0 - t.x0 * m.m1);
  const std::int64_t den = m.m1 * (t.x2 * m.m0 - t.x0 * m.m2);
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// ============================================================================
// Robust combinations
// ============================================================================

/// MAX3 = max(|CATT_0|, |CATT_1/2|, |CATT_1|).
inline double max3(const ContingencyTable& t) {
  return std::max({std::fabs(catt(t, 0.0)), std::fabs(catt(t, 0.5)), std::fabs(catt(t, 1.0))});
}

/// CMAX = max over s in [0,1] of CATT_s^2: equals the Pearson statistic when
/// the data-driven score lies strictly inside (0,1), otherwise the maximum is
/// attained at an endpoint, max(CATT_0^2, CATT_1^2).  An UNDEFINED score
/// falls to the endpoint branch.
inline double cmax(const ContingencyTable& t) {
  const std::optional<double> s = data_driven_score(t);
  if (s && *s > 0.0 && *s < 1.0) return pearson(t);
  const double c0 = catt(t, 0.0), c1 = catt(t, 1.0);
  return std::max(c0 * c0, c1 * c1);
}

/// Constrained likelihood ratio statistic.  With the unrestricted maximum l1,
/// the null maximum l0, and the boundary maxima l_rec (penetrances pooled
/// over columns {0,1}) and l_dom (pooled over {1,2}):
///   CLRT = 2(l1 - l0)                if the data-driven score is in [0,1]
///        = 2(max(l_rec, l_dom) - l0) otherwise (monotone constraint binds).
/// All terms use the 0 ln 0 = 0 convention.
inline double clrt(const ContingencyTable& t) {
  const auto xlnx = [](std::int64_t v) {
    return v > 0 ? static_cast<double>(v) * std::log(static_cast<double>(v)) : 0.0;
  };
  const Margins m = margins_of(t);
  // An exact independence table (both pooled 2x2 collapses independent,
  // detected in integers) has every branch maximum equal to l0; return the
  // algebraic zero exactly instead of cancellation noise.  All other values
  // are strictly positive, so clamping guards the sign without masking.
  if (m.total() * (t.x0 + t.x1) == m.n1 * (m.m0 + m.m1) &&
      m.total() * t.x0 == m.n1 * m.m0)
    return 0.0;
  const double l0 = xlnx(m.m0) + xlnx(m.m1) + xlnx(m.m2) - xlnx(m.total());
  const double rows = xlnx(m.n1) + xlnx(m.n2);
  const std::optional<double> s = data_driven_score(t);
  if (s && *s >= 0.0 && *s <= 1.0) {
    const double l1 = xlnx(t.x0) + xlnx(t.x1) + xlnx(t.x2) +
                      xlnx(t.y0) + xlnx(t.y1) + xlnx(t.y2) - rows;
    return std::max(0.0, 2.0 * (l1 - l0));
  }
  const double lrec = xlnx(t.x0 + t.x1) + xlnx(t.x2) + xlnx(t.y0 + t.y1) + xlnx(t.y2) +
                      xlnx(m.m0) + xlnx(m.m1) - xlnx(m.m0 + m.m1) - rows;
  const double ldom = xlnx(t.x1 + t.x2) + xlnx(t.x0) + xlnx(t.y1 + t.y2) + xlnx(t.y0) +
                      xlnx(m.m1) + xlnx(m.m2) - xlnx(m.m1 + m.m2) - rows;
  return std::max(0.0, 2.0 * (std::max(lrec, ldom) - l0));
}

/// Asymptotic null correlation of CATT_0 and CATT_1 as a function of the
/// homozygote frequencies: rho = sqrt(g0 g2 / ((1-g0)(1-g2))).
inline double catt_correlation(double g0, double g2) {
  return std::sqrt(g0 * g2 / ((1.0 - g0) * (1.0 - g2)));
}

/// Splits a nonnegative integer v = a^2 r with r square-free, so sqrt(v) can
/// be carried as the pair (a, sqrt(r)).
inline void square_free_split(std::int64_t v, std::int64_t& a, std::int64_t& r) {
  a = 1;
  r = v;
  for (std::int64_t d = 2; d * d <= r; ++d)
    while (r % (d * d) == 0) {
      r /= d * d;
      a *= d;
    }
}

/// Margin-only pieces of the MERT evaluation.
///
/// MERT = (CATT_0 + CATT_1)/sqrt(2(1+rho_hat)) with rho_hat estimated from the
/// margins (degenerate frequency estimates g0_hat or g2_hat in {0,1} set
/// rho_hat = 0), and the component convention CATT_s = 0 at zero variance.
/// The component sum is evaluated over a common denominator.  Writing the
/// integer variance cores I_0 = m2(m0+m1) and I_1 = m0(m1+m2) (so that
/// Var_s = n1 n2 I_s / N) as I_s = a_s^2 r_s with r_s square-free,
///
///   CATT_0 + CATT_1 = (num0 a1 sqrt(r1) + num1 a0 sqrt(r0))
///                     / (sqrt(n1 n2 / N) a0 sqrt(r0) a1 sqrt(r1)).
///
/// A table where the sum cancels algebraically has r0 = r1 and integer
/// coefficients num0 a1 = -num1 a0 (surds with distinct square-free parts are
/// rationally independent), so the two products round sign-symmetrically and
/// the numerator evaluates to exactly zero.  Enumeration tie handling at such
/// tables therefore does not depend on rounding noise, and any two evaluation
/// paths built on this form agree there bitwise.
struct MertEvaluator {
  std::int64_t k0 = 0, k1 = 0;  ///< integer factors multiplying num0, num1
  double s0 = 0.0, s1 = 0.0;    ///< surds paired with num0, num1
  double scale = 0.0;           ///< common denominator and 1/sqrt(2(1+rho))

  /// Signed MERT of a table with trend numerators num_s =
  /// N(s x1 + x2) - n1(s m1 + m2) for s = 0, 1 (exact integers).
  double operator()(std::int64_t num0, std::int64_t num1) const {
    return (static_cast<double>(num0 * k0) * s0 + static_cast<double>(num1 * k1) * s1) * scale;
  }

  static MertEvaluator from_margins(const Margins& m) {
    const double N = static_cast<double>(m.total());
    const double g0 = static_cast<double>(m.m0) / N;
    const double g2 = static_cast<double>(m.m2) / N;
    double rho = 0.0;
    if (g0 > 0.0 && g0 < 1.0 && g2 > 0.0 && g2 < 1.0) rho = catt_correlation(g0, g2);
    const double ms = 1.0 / std::sqrt(2.0 * (1.0 + rho));
    const double c = static_cast<double>(m.n1) * static_cast<double>(m.n2) / N;
    const std::int64_t i0 = m.m2 * (m.m0 + m.m1);
    const std::int64_t i1 = m.m0 * (m.m1 + m.m2);
    MertEvaluator e;
    if (i0 > 0 && i1 > 0) {
      std::int64_t a0, r0, a1, r1;
      square_free_split(i0, a0, r0);
      square_free_split(i1, a1, r1);
      e.k0 = a1;
      e.s0 = std::sqrt(static_cast<double>(r1));
      e.k1 = a0;
      e.s1 = std::sqrt(static_cast<double>(r0));
      e.scale = ms / (std::sqrt(c) * static_cast<double>(a0) * e.s1 *
                      static_cast<double>(a1) * e.s0);
    } else if (i1 > 0) {  // zero-variance CATT_0 contributes 0
      e.k1 = 1;
      e.s1 = 1.0;
      e.scale = ms / std::sqrt(c * static_cast<double>(i1));
    } else if (i0 > 0) {  // zero-variance CATT_1 contributes 0
      e.k0 = 1;
      e.s0 = 1.0;
      e.scale = ms / std::sqrt(c * static_cast<double>(i0));
    }
    return e;
  }
};

/// Maximin efficiency robust trend, signed; |MERT| is the two-sided report.
inline double mert(const ContingencyTable& t) {
  const Margins m = margins_of(t);
  const std::int64_t num0 = m.total() * t.x2 - m.n1 * m.m2;
  const std::int64_t num1 = m.total() * (t.x1 + t.x2) - m.n1 * (m.m1 + m.m2);
  return MertEvaluator::from_margins(m)(num0, num1);
}

/// MIN2 = min(two-sided asymptotic p of CATT_1/2, asymptotic p of Pearson);
/// small values reject.
inline double min2_statistic(const ContingencyTable& t) {
  const double p_trend = 2.0 * norm_sf(std::fabs(catt(t, 0.5)));
  const double p_chi = chisq2_sf(pearson(t));
  return std::min(p_trend, p_chi);
}

// ============================================================================
// Dispatch
// ============================================================================

/// The rejection-ordered value of a statistic: two-sided trend statistics are
/// folded to their absolute values so that "more extreme" always means larger
/// (LargeRejects) or smaller (Min2, SmallRejects).
inline double evaluate(StatisticKind k, const ContingencyTable& t) {
  switch (k) {
    case StatisticKind::CattHalf: return std::fabs(catt(t, 0.5));
    case StatisticKind::Pearson:  return pearson(t);
    case StatisticKind::Min2:     return min2_statistic(t);
    case StatisticKind::Max3:     return max3(t);
    case StatisticKind::Cmax:     return cmax(t);
    case StatisticKind::Clrt:     return clrt(t);
    case StatisticKind::Mert:     return std::fabs(mert(t));
  }
  return 0.0;
}

}  // namespace genassoc
