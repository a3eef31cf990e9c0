#pragma once
// Exact conditional enumeration p-values.  Conditioning on the margins makes
// the case row trivariate hypergeometric (product of three binomial
// coefficients over C(N, n1)); the p-value of a statistic is the sum of those
// probabilities over all tables at least as extreme as observed.  The
// enumeration kernel precomputes everything margin-dependent so the per-table
// cost is a handful of flops, supports the probability-ordered x0 sweep with
// early abort, and accumulates all seven statistics in one pass.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "genassoc/rng.hpp"
#include "genassoc/statistics.hpp"
#include "genassoc/table.hpp"

namespace genassoc {

// ============================================================================
// Shared lookup tables
// ============================================================================

/// Precomputed ln(l!) for l = 0..n_max.
class LogFactorialTable {
 public:
  explicit LogFactorialTable(std::int64_t n_max) : lf_(static_cast<std::size_t>(n_max) + 1) {
    lf_[0] = 0.0;
    for (std::int64_t l = 1; l <= n_max; ++l)
      lf_[static_cast<std::size_t>(l)] = std::lgamma(static_cast<double>(l) + 1.0);
  }
  double operator()(std::int64_t l) const { return lf_[static_cast<std::size_t>(l)]; }
  std::int64_t max_n() const { return static_cast<std::int64_t>(lf_.size()) - 1; }

 private:
  std::vector<double> lf_;
};

/// Precomputed l*ln(l) (0 ln 0 = 0) for the likelihood-ratio statistic.
class XLogXTable {
 public:
  explicit XLogXTable(std::int64_t n_max) : v_(static_cast<std::size_t>(n_max) + 1) {
    v_[0] = 0.0;
    for (std::int64_t l = 1; l <= n_max; ++l)
      v_[static_cast<std::size_t>(l)] =
          static_cast<double>(l) * std::log(static_cast<double>(l));
  }
  double operator()(std::int64_t l) const { return v_[static_cast<std::size_t>(l)]; }

 private:
  std::vector<double> v_;
};

/// The two lookup tables the enumeration kernel reads; immutable once built.
struct EnumerationTables {
  LogFactorialTable lf;
  XLogXTable xlx;
  explicit EnumerationTables(std::int64_t n_max) : lf(n_max), xlx(n_max) {}
};

/// Process-wide shared tables, built once and grown on demand (doubling), so
/// repeated enumerations at one scale never rebuild.  Thread-safe; the
/// returned snapshot stays valid regardless of later growth.
inline std::shared_ptr<const EnumerationTables> shared_enumeration_tables(std::int64_t n_min) {
  static std::mutex mu;
  static std::shared_ptr<const EnumerationTables> current;
  std::lock_guard<std::mutex> lock(mu);
  if (!current || current->lf.max_n() < n_min) {
    std::int64_t size = std::max<std::int64_t>(n_min, 1024);
    if (current) size = std::max(size, 2 * current->lf.max_n());
    current = std::make_shared<const EnumerationTables>(size);
  }
  return current;
}

// ============================================================================
// Hypergeometric probability
// ============================================================================

/// ln C(n, k) from a log-factorial table.
inline double ln_choose(const LogFactorialTable& lf, std::int64_t n, std::int64_t k) {
  return lf(n) - lf(k) - lf(n - k);
}

/// Conditional probability of a table given its margins:
/// C(m0,x0) C(m1,x1) C(m2,x2) / C(N,n1), via ln-factorial sums.
inline double hypergeometric_prob(const ContingencyTable& z, const LogFactorialTable& lf) {
  const Margins m = margins_of(z);
  if (m.total() > lf.max_n())
    throw std::domain_error("log-factorial table smaller than the table total");
  return std::exp(ln_choose(lf, m.m0, z.x0) + ln_choose(lf, m.m1, z.x1) +
                  ln_choose(lf, m.m2, z.x2) - ln_choose(lf, m.total(), m.n1));
}

// ============================================================================
// Enumeration options and results
// ============================================================================

enum class EnumerationOrder { ProbabilitySweep, Lexicographic };

/// Controls for the enumeration: optional early-abort threshold (no abort by
/// default, matching single-table reporting; simulation studies set it to the
/// largest significance level) and the iteration order.
struct EnumerationOptions {
  std::optional<double> abort_threshold{};
  EnumerationOrder ordering = EnumerationOrder::ProbabilitySweep;
};

/// An exact p-value, or the distinct ABORTED outcome certifying only
/// p > bound().  ABORTED is not a number; rejects() treats it as a
/// non-rejection, which is sound whenever alpha <= bound().
class ExactPValue {
 public:
  ExactPValue() = default;
  static ExactPValue exact(double p) { return ExactPValue{p, false}; }
  static ExactPValue aborted_at(double threshold) { return ExactPValue{threshold, true}; }

  bool aborted() const { return aborted_; }
  double p() const {
    if (aborted_) throw std::logic_error("ABORTED enumeration has no p-value");
    return value_;
  }
  double bound() const { return value_; }  // p > bound when aborted
  bool rejects(double alpha) const { return !aborted_ && value_ <= alpha; }

 private:
  ExactPValue(double v, bool a) : value_(v), aborted_(a) {}
  double value_ = 1.0;
  bool aborted_ = false;
};

/// Result of a multi-statistic enumeration pass.
struct ExactReport {
  std::array<ExactPValue, kStatisticCount> p{};
  std::int64_t summands = 0;  // tables visited before completion or abort
  bool aborted = false;

  const ExactPValue& operator[](StatisticKind k) const { return p[statistic_index(k)]; }
};

// ============================================================================
// Enumeration kernel
// ============================================================================

/// Per-margin enumeration kernel.  Precomputes every margin-only constant;
/// statistics() evaluates all seven statistics of the table with case row
/// (x0, x1, n1-x0-x1) in a few dozen flops, and both the observed table and
/// every enumerated table go through that same code path.
class ExactEnumerator {
 public:
  ExactEnumerator(const Margins& m, std::shared_ptr<const EnumerationTables> tables)
      : m_(m), tables_(std::move(tables)) {
    if (m_.m0 < 0 || m_.m1 < 0 || m_.m2 < 0 || m_.n1 < 1 || m_.n2 < 1)
      throw std::invalid_argument("invalid margins");
    if (m_.total() > tables_->lf.max_n())
      throw std::domain_error("enumeration tables smaller than N");
    const double N = static_cast<double>(m_.total());
    const double n1 = static_cast<double>(m_.n1), n2 = static_cast<double>(m_.n2);
    const double m0 = static_cast<double>(m_.m0), m1 = static_cast<double>(m_.m1),
                 m2 = static_cast<double>(m_.m2);
    n_ = N;
    // CATT_s for s in {0, 1/2, 1}: value = (N(s x1 + x2) - shift_s) * inv_den_s.
    const double svals[3] = {0.0, 0.5, 1.0};
    for (int i = 0; i < 3; ++i) {
      const double s = svals[i];
      const double sm = s * m1 + m2;
      catt_shift_[i] = n1 * sm;
      const double var = n1 * n2 * (s * s * m1 + m2 - sm * sm / N);
      catt_inv_den_[i] = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
    }
    // Pearson: N^2/(n1 n2) * sum_i (x_i - n1 m_i/N)^2 / m_i, algebraically
    // equal to the six-cell form.
    pe_scale_ = N * N / (n1 * n2);
    const double ms[3] = {m0, m1, m2};
    for (int i = 0; i < 3; ++i) {
      pe_exp_[i] = n1 * ms[i] / N;
      pe_inv_m_[i] = ms[i] > 0.0 ? 1.0 / ms[i] : 0.0;  // m_i = 0 forces x_i = 0
    }
    // CLRT constants.
    const XLogXTable& xlx = tables_->xlx;
    const double rows = xlx(m_.n1) + xlx(m_.n2);
    l0_ = xlx(m_.m0) + xlx(m_.m1) + xlx(m_.m2) - xlx(m_.total());
    clrt_k1_ = rows + l0_;
    krec_ = xlx(m_.m0) + xlx(m_.m1) - xlx(m_.m0 + m_.m1) - rows;
    kdom_ = xlx(m_.m1) + xlx(m_.m2) - xlx(m_.m1 + m_.m2) - rows;
    s_defined_ = m_.m0 > 0 && m_.m1 > 0 && m_.m2 > 0;
    // MERT: common-denominator component sum with exact zero cancellation.
    mert_eval_ = MertEvaluator::from_margins(m_);
    n_i_ = m_.total();
    mert_shift0_ = m_.n1 * m_.m2;
    mert_shift1_ = m_.n1 * (m_.m1 + m_.m2);
    // Hypergeometric log-probability: lp = lp_const - sum of six ln-factorials.
    const LogFactorialTable& lf = tables_->lf;
    lp_const_ = lf(m_.m0) + lf(m_.m1) + lf(m_.m2) - ln_choose(lf, m_.total(), m_.n1);
  }

  const Margins& margins() const { return m_; }

  double log_prob(std::int64_t x0, std::int64_t x1) const {
    const std::int64_t x2 = m_.n1 - x0 - x1;
    const LogFactorialTable& lf = tables_->lf;
    return lp_const_ - lf(x0) - lf(m_.m0 - x0) - lf(x1) - lf(m_.m1 - x1) - lf(x2) -
           lf(m_.m2 - x2);
  }

  /// All seven statistics (rejection-ordered: trend statistics as absolute
  /// values, MIN2 as the min of the two asymptotic tails), indexed by
  /// statistic_index().
  std::array<double, kStatisticCount> statistics(std::int64_t x0, std::int64_t x1) const {
    const std::int64_t x2 = m_.n1 - x0 - x1;
    const double c0 = catt_component(0, x1, x2);
    const double ch = catt_component(1, x1, x2);
    const double c1 = catt_component(2, x1, x2);
    const double pe = pearson_of(x0, x1, x2);
    std::array<double, kStatisticCount> out{};
    out[statistic_index(StatisticKind::CattHalf)] = std::fabs(ch);
    out[statistic_index(StatisticKind::Pearson)] = pe;
    out[statistic_index(StatisticKind::Min2)] =
        std::min(2.0 * norm_sf(std::fabs(ch)), std::exp(-0.5 * pe));
    out[statistic_index(StatisticKind::Max3)] =
        std::max({std::fabs(c0), std::fabs(ch), std::fabs(c1)});
    out[statistic_index(StatisticKind::Cmax)] =
        score_in_open_unit(x0, x1, x2) ? pe : std::max(c0 * c0, c1 * c1);
    out[statistic_index(StatisticKind::Clrt)] = clrt_of(x0, x1, x2);
    out[statistic_index(StatisticKind::Mert)] = std::fabs(mert_of(x1, x2));
    return out;
  }

  /// One enumeration pass accumulating all seven p-value sums; with an abort
  /// threshold the pass stops once every sum exceeds it.
  ExactReport exact_p_all(const ContingencyTable& z, const EnumerationOptions& opts = {}) const {
    return run(z, opts, 0x7F);
  }

  /// Single-statistic p-value; with an abort threshold the pass stops once
  /// this statistic's sum exceeds it.
  ExactPValue exact_p(StatisticKind kind, const ContingencyTable& z,
                      const EnumerationOptions& opts = {}) const {
    return run(z, opts, 1u << statistic_index(kind))[kind];
  }

 private:
  double catt_component(int i, std::int64_t x1, std::int64_t x2) const {
    const double sx = (i == 0   ? static_cast<double>(x2)
                       : i == 1 ? 0.5 * static_cast<double>(x1) + static_cast<double>(x2)
                                : static_cast<double>(x1 + x2));
    return (n_ * sx - catt_shift_[i]) * catt_inv_den_[i];
  }

  double mert_of(std::int64_t x1, std::int64_t x2) const {
    return mert_eval_(n_i_ * x2 - mert_shift0_, n_i_ * (x1 + x2) - mert_shift1_);
  }

  // Log-mass of one x0 block up to a shared constant: the x0 margin is
  // hypergeometric with parameters (N, m0, n1), and min_x0 >= m0 - n2 keeps
  // every factorial argument non-negative.
  double x0_marginal_log(std::int64_t x0) const {
    const LogFactorialTable& lf = tables_->lf;
    return -lf(x0) - lf(m_.m0 - x0) - lf(m_.n1 - x0) - lf(m_.n2 - m_.m0 + x0);
  }

  double pearson_of(std::int64_t x0, std::int64_t x1, std::int64_t x2) const {
    const double d0 = static_cast<double>(x0) - pe_exp_[0];
    const double d1 = static_cast<double>(x1) - pe_exp_[1];
    const double d2 = static_cast<double>(x2) - pe_exp_[2];
    return pe_scale_ * (d0 * d0 * pe_inv_m_[0] + d1 * d1 * pe_inv_m_[1] + d2 * d2 * pe_inv_m_[2]);
  }

  // Exact integer test of the data-driven score s = num/den (cross-multiplied
  // by m0 m1 m2) against the open interval (0,1) and closed [0,1].
  void score_parts(std::int64_t x0, std::int64_t x1, std::int64_t x2, std::int64_t& num,
                   std::int64_t& den) const {
    num = m_.m2 * (x1 * m_.m0 - x0 * m_.m1);
    den = m_.m1 * (x2 * m_.m0 - x0 * m_.m2);
  }

  bool score_in_open_unit(std::int64_t x0, std::int64_t x1, std::int64_t x2) const {
    if (!s_defined_) return false;
    std::int64_t num, den;
    score_parts(x0, x1, x2, num, den);
    if (den > 0) return num > 0 && num < den;
    if (den < 0) return num < 0 && num > den;
    return false;
  }

  bool score_in_closed_unit(std::int64_t x0, std::int64_t x1, std::int64_t x2) const {
    if (!s_defined_) return false;
    std::int64_t num, den;
    score_parts(x0, x1, x2, num, den);
    if (den > 0) return num >= 0 && num <= den;
    if (den < 0) return num <= 0 && num >= den;
    return false;
  }

  double clrt_of(std::int64_t x0, std::int64_t x1, std::int64_t x2) const {
    // An exact independence table (both pooled 2x2 collapses independent,
    // detected in integers) has every branch maximum equal to l0; return the
    // algebraic zero exactly instead of cancellation noise.  All other values
    // are strictly positive, so clamping guards the sign without masking.
    if (n_i_ * (x0 + x1) == m_.n1 * (m_.m0 + m_.m1) && n_i_ * x0 == m_.n1 * m_.m0)
      return 0.0;
    const XLogXTable& xlx = tables_->xlx;
    const std::int64_t y0 = m_.m0 - x0, y1 = m_.m1 - x1, y2 = m_.m2 - x2;
    if (score_in_closed_unit(x0, x1, x2)) {
      const double l1 = xlx(x0) + xlx(x1) + xlx(x2) + xlx(y0) + xlx(y1) + xlx(y2);
      return std::max(0.0, 2.0 * (l1 - clrt_k1_));
    }
    const double lrec = xlx(x0 + x1) + xlx(x2) + xlx(y0 + y1) + xlx(y2) + krec_;
    const double ldom = xlx(x1 + x2) + xlx(x0) + xlx(y1 + y2) + xlx(y0) + kdom_;
    return std::max(0.0, 2.0 * (std::max(lrec, ldom) - l0_));
  }

  // Smallest a in [lo, hi] with f(a) <= cut, for non-increasing f with
  // f(hi) <= cut; bisection to adjacent doubles so the threshold test is
  // exactly equivalent to evaluating f.
  template <class F>
  static double smallest_arg_leq(F f, double cut, double lo, double hi) {
    if (f(lo) <= cut) return lo;
    for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (f(mid) <= cut)
        hi = mid;
      else
        lo = mid;
    }
    return hi;
  }

  ExactReport run(const ContingencyTable& z, const EnumerationOptions& opts,
                  unsigned mask) const {
    if (margins_of(z) != m_)
      throw std::invalid_argument("observed table does not match the kernel margins");
    constexpr double kTieTol = 1e-12;  // relative; errs toward inclusion
    const std::array<double, kStatisticCount> tobs = statistics(z.x0, z.x1);
    // Inclusion cutoffs.  For LargeRejects kinds, include T >= cut; for MIN2,
    // include T <= cut, re-expressed as |CATT_half| >= min2_trend_cut OR
    // Pearson >= min2_chi_cut so the hot loop needs no tail evaluations.
    std::array<double, kStatisticCount> cut{};
    for (std::size_t k = 0; k < kStatisticCount; ++k) {
      const double tol = kTieTol * std::fabs(tobs[k]);
      cut[k] = rejection_direction(kAllStatistics[k]) == RejectionDirection::LargeRejects
                   ? tobs[k] - tol
                   : tobs[k] + tol;
    }
    const double min2_cut = cut[statistic_index(StatisticKind::Min2)];
    const double min2_trend_cut =
        smallest_arg_leq([](double a) { return 2.0 * norm_sf(a); }, min2_cut, 0.0, 40.0);
    const double min2_chi_cut =
        smallest_arg_leq([](double b) { return std::exp(-0.5 * b); }, min2_cut, 0.0, 1500.0);

    const double theta = opts.abort_threshold ? *opts.abort_threshold
                                              : std::numeric_limits<double>::infinity();
    std::array<double, kStatisticCount> sum{};
    std::int64_t visited = 0;
    bool stopped = false;

    const auto scan_x0_block = [&](std::int64_t x0) {
      const std::int64_t rest = m_.n1 - x0;
      const std::int64_t lo = std::max<std::int64_t>(0, rest - m_.m2);
      const std::int64_t hi = std::min(m_.m1, rest);
      for (std::int64_t x1 = lo; x1 <= hi; ++x1) {
        const std::int64_t x2 = rest - x1;
        ++visited;
        const double prob = std::exp(log_prob(x0, x1));
        const double c0 = catt_component(0, x1, x2);
        const double ch = catt_component(1, x1, x2);
        const double c1 = catt_component(2, x1, x2);
        const double pe = pearson_of(x0, x1, x2);
        const double ach = std::fabs(ch);
        if (ach >= cut[statistic_index(StatisticKind::CattHalf)])
          sum[statistic_index(StatisticKind::CattHalf)] += prob;
        if (pe >= cut[statistic_index(StatisticKind::Pearson)])
          sum[statistic_index(StatisticKind::Pearson)] += prob;
        if (ach >= min2_trend_cut || pe >= min2_chi_cut)
          sum[statistic_index(StatisticKind::Min2)] += prob;
        if (std::max({std::fabs(c0), ach, std::fabs(c1)}) >=
            cut[statistic_index(StatisticKind::Max3)])
          sum[statistic_index(StatisticKind::Max3)] += prob;
        const double cmax_v =
            score_in_open_unit(x0, x1, x2) ? pe : std::max(c0 * c0, c1 * c1);
        if (cmax_v >= cut[statistic_index(StatisticKind::Cmax)])
          sum[statistic_index(StatisticKind::Cmax)] += prob;
        if (clrt_of(x0, x1, x2) >= cut[statistic_index(StatisticKind::Clrt)])
          sum[statistic_index(StatisticKind::Clrt)] += prob;
        if (std::fabs(mert_of(x1, x2)) >= cut[statistic_index(StatisticKind::Mert)])
          sum[statistic_index(StatisticKind::Mert)] += prob;
        // Abort once every tracked sum has crossed the threshold.
        bool all_crossed = true;
        for (std::size_t k = 0; k < kStatisticCount && all_crossed; ++k)
          if ((mask >> k) & 1u) all_crossed = sum[k] > theta;
        if (all_crossed) {
          stopped = true;
          return;
        }
      }
    };

    const std::int64_t x0_lo = min_x0(m_), x0_hi = max_x0(m_);
    if (opts.ordering == EnumerationOrder::ProbabilitySweep) {
      // Decreasing block-mass order: the x0 margin of the conditional law is
      // hypergeometric, hence unimodal, so advancing whichever frontier block
      // is heavier visits the blocks in exactly decreasing marginal mass.
      const std::int64_t mode = std::clamp(
          (m_.n1 + 1) * (m_.m0 + 1) / (m_.total() + 2), x0_lo, x0_hi);
      std::int64_t up = mode, down = mode - 1;
      while ((up <= x0_hi || down >= x0_lo) && !stopped) {
        const bool take_up =
            down < x0_lo ||
            (up <= x0_hi && x0_marginal_log(up) >= x0_marginal_log(down));
        scan_x0_block(take_up ? up++ : down--);
      }
    } else {
      for (std::int64_t x0 = x0_lo; x0 <= x0_hi && !stopped; ++x0) scan_x0_block(x0);
    }

    ExactReport report;
    report.summands = visited;
    report.aborted = stopped;
    for (std::size_t k = 0; k < kStatisticCount; ++k)
      report.p[k] = stopped ? ExactPValue::aborted_at(theta)
                            : ExactPValue::exact(std::min(sum[k], 1.0));
    return report;
  }

  Margins m_;
  std::shared_ptr<const EnumerationTables> tables_;
  double n_ = 0.0;
  double catt_shift_[3] = {0, 0, 0};
  double catt_inv_den_[3] = {0, 0, 0};
  double pe_scale_ = 0.0, pe_exp_[3] = {0, 0, 0}, pe_inv_m_[3] = {0, 0, 0};
  double l0_ = 0.0, clrt_k1_ = 0.0, krec_ = 0.0, kdom_ = 0.0;
  bool s_defined_ = false;
  MertEvaluator mert_eval_;
  std::int64_t n_i_ = 0, mert_shift0_ = 0, mert_shift1_ = 0;
  double lp_const_ = 0.0;
};

// ============================================================================
// Convenience entry points
// ============================================================================

inline ExactReport exact_p_all(const ContingencyTable& z, const EnumerationOptions& opts = {}) {
  check_valid(z);
  ExactEnumerator kernel(margins_of(z), shared_enumeration_tables(z.total()));
  return kernel.exact_p_all(z, opts);
}

inline ExactPValue exact_p(StatisticKind kind, const ContingencyTable& z,
                           const EnumerationOptions& opts = {}) {
  check_valid(z);
  ExactEnumerator kernel(margins_of(z), shared_enumeration_tables(z.total()));
  return kernel.exact_p(kind, z, opts);
}

/// Permutation estimate of the exact p-value: draws b tables from the
/// conditional hypergeometric law (the distribution genotype-label shuffling
/// induces) and returns (1 + #{T(draw) at least as extreme})/(b + 1).
/// Deterministic given the seed; replicate i uses substream i.
inline double permutation_p(StatisticKind kind, const ContingencyTable& z, std::int64_t b,
                            std::uint64_t seed) {
  if (b < 1) throw std::invalid_argument("permutation_p requires b >= 1");
  check_valid(z);
  const Margins m = margins_of(z);
  ExactEnumerator kernel(m, shared_enumeration_tables(z.total()));
  const std::size_t idx = statistic_index(kind);
  const double tobs = kernel.statistics(z.x0, z.x1)[idx];
  constexpr double kTieTol = 1e-12;
  const bool large = rejection_direction(kind) == RejectionDirection::LargeRejects;
  const double cut = large ? tobs - kTieTol * std::fabs(tobs) : tobs + kTieTol * std::fabs(tobs);
  const HypergeometricSampler first(m.total(), m.m0, m.n1);
  std::int64_t beyond = 0;
  for (std::int64_t i = 0; i < b; ++i) {
    PhiloxRng rng(seed, static_cast<std::uint64_t>(i));
    const std::int64_t x0 = first.draw(rng);
    const std::int64_t x1 =
        HypergeometricSampler(m.total() - m.m0, m.m1, m.n1 - x0).draw(rng);
    const double v = kernel.statistics(x0, x1)[idx];
    if (large ? v >= cut : v <= cut) ++beyond;
  }
  return (1.0 + static_cast<double>(beyond)) / (static_cast<double>(b) + 1.0);
}

}  // namespace genassoc
