#pragma once
// Monte Carlo engines for test size and power, plus brute-force exact power
// for tiny designs.  Replicate i always uses Philox substream i of the study
// seed, so results are bit-identical across runs and across any partitioning
// of the replicates onto threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "genassoc/asymptotic.hpp"
#include "genassoc/exact.hpp"
#include "genassoc/genetics.hpp"
#include "genassoc/rng.hpp"
#include "genassoc/statistics.hpp"
#include "genassoc/table.hpp"

namespace genassoc {

// ============================================================================
// Study description and results
// ============================================================================

enum class Method { Asymptotic, Exact };
constexpr std::array<Method, 2> kAllMethods = {Method::Asymptotic, Method::Exact};

inline const char* method_name(Method m) {
  return m == Method::Asymptotic ? "asymptotic" : "exact";
}

/// One Monte Carlo study: a sample-size pair, a penetrance model, the
/// replicate count, the significance levels to score, and the seed.  The
/// largest alpha doubles as the enumeration abort threshold unless
/// overridden (the override must be >= max(alphas) to keep ABORTED
/// soundly scorable as a non-rejection).
struct StudyDesign {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  GeneticModelSpec spec{};
  std::int64_t replicates = 0;
  std::vector<double> alphas{};
  std::uint64_t seed = 0;
  std::optional<double> abort_threshold{};
};

/// Rejection counts per (statistic, method, significance level), with the
/// binomial point estimate and 95% interval half-length derived on demand.
struct PowerEstimate {
  std::vector<double> alphas;       // strictly decreasing
  std::int64_t b = 0;               // replicates
  std::vector<std::int64_t> hits;   // [kind][method][alpha], flattened

  std::size_t cell(StatisticKind k, Method m, std::size_t alpha_idx) const {
    return (statistic_index(k) * 2 + (m == Method::Asymptotic ? 0 : 1)) * alphas.size() +
           alpha_idx;
  }
  std::int64_t hit_count(StatisticKind k, Method m, std::size_t alpha_idx) const {
    return hits[cell(k, m, alpha_idx)];
  }
  double power(StatisticKind k, Method m, std::size_t alpha_idx) const {
    return static_cast<double>(hit_count(k, m, alpha_idx)) / static_cast<double>(b);
  }
  double ci_half(StatisticKind k, Method m, std::size_t alpha_idx) const {
    const double g = power(k, m, alpha_idx);
    return 1.96 * std::sqrt(g * (1.0 - g) / static_cast<double>(b));
  }
};

/// Raised when a brute-force computation is requested beyond its size cap.
class CapExceededError : public std::domain_error {
 public:
  explicit CapExceededError(const std::string& what)
      : std::domain_error("CAP_EXCEEDED: " + what) {}
};

// ============================================================================
// Sampling
// ============================================================================

/// One random table: case row trinomial(n1; p), control row trinomial(n2; q),
/// independent, each realized as two sequential binomial draws.
template <class Rng>
ContingencyTable draw_table(const PopulationParams& theta, std::int64_t n1, std::int64_t n2,
                            Rng& rng) {
  const auto draw_row = [&rng](const std::array<double, 3>& probs, std::int64_t n,
                               std::int64_t& a0, std::int64_t& a1, std::int64_t& a2) {
    a0 = BinomialSampler(n, probs[0]).draw(rng);
    const double rest = probs[1] + probs[2];
    a1 = rest > 0.0 ? BinomialSampler(n - a0, probs[1] / rest).draw(rng) : 0;
    a2 = n - a0 - a1;
  };
  ContingencyTable z{};
  draw_row(theta.cases(), n1, z.x0, z.x1, z.x2);
  draw_row(theta.controls(), n2, z.y0, z.y1, z.y2);
  return z;
}

// ============================================================================
// Monte Carlo size/power estimation
// ============================================================================

namespace detail {

inline std::vector<double> normalized_alphas(const std::vector<double>& alphas) {
  if (alphas.empty()) throw std::invalid_argument("study requires at least one alpha");
  std::vector<double> out = alphas;
  std::sort(out.begin(), out.end(), std::greater<double>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  for (double a : out)
    if (!(a > 0.0 && a < 1.0))
      throw std::invalid_argument("significance levels must lie in (0,1)");
  return out;
}

}  // namespace detail

/// Estimates size or power for all seven statistics under both p-value
/// methods at every design alpha.  Per replicate: draw a table, score the
/// asymptotic p-values (margin degeneracies score as p = 1), and run one
/// multi-statistic exact enumeration with early abort at the threshold;
/// ABORTED certifies p > threshold and is scored as a non-rejection.
/// Bit-identical for a fixed seed at any thread count.
inline PowerEstimate estimate_power(const StudyDesign& design, int threads = 1) {
  if (design.n1 < 1 || design.n2 < 1)
    throw std::invalid_argument("study requires n1 >= 1 and n2 >= 1");
  if (design.replicates < 1) throw std::invalid_argument("study requires replicates >= 1");
  PowerEstimate est;
  est.alphas = detail::normalized_alphas(design.alphas);
  est.b = design.replicates;
  const double theta_abort = design.abort_threshold.value_or(est.alphas.front());
  if (theta_abort < est.alphas.front())
    throw std::invalid_argument("abort threshold below max(alphas) would miscount rejections");
  const PopulationParams theta = theta_from_model(design.spec);  // may overflow
  const std::size_t n_alpha = est.alphas.size();
  const std::size_t n_cells = kStatisticCount * 2 * n_alpha;
  const auto tables = shared_enumeration_tables(design.n1 + design.n2);
  const EnumerationOptions opts{theta_abort, EnumerationOrder::ProbabilitySweep};

  const auto worker = [&](std::int64_t lo, std::int64_t hi, std::vector<std::int64_t>& out) {
    std::vector<std::int64_t> local(n_cells, 0);
    const auto bump = [&](StatisticKind k, Method m, double p) {
      const std::size_t base =
          (statistic_index(k) * 2 + (m == Method::Asymptotic ? 0 : 1)) * n_alpha;
      for (std::size_t a = 0; a < n_alpha && p <= est.alphas[a]; ++a) ++local[base + a];
    };
    for (std::int64_t i = lo; i < hi; ++i) {
      PhiloxRng rng(design.seed, static_cast<std::uint64_t>(i));
      const ContingencyTable z = draw_table(theta, design.n1, design.n2, rng);
      for (StatisticKind k : kAllStatistics) {
        double pa;
        try {
          pa = asymptotic_p(k, z);
        } catch (const DegenerateFreqsError&) {
          pa = 1.0;  // margin degeneracy: no asymptotic law, never reject
        }
        bump(k, Method::Asymptotic, pa);
      }
      const ExactEnumerator kernel(margins_of(z), tables);
      const ExactReport report = kernel.exact_p_all(z, opts);
      for (StatisticKind k : kAllStatistics)
        if (!report[k].aborted()) bump(k, Method::Exact, report[k].p());
    }
    out = std::move(local);
  };

  threads = std::max(1, threads);
  const std::int64_t b = design.replicates;
  const int used = static_cast<int>(std::min<std::int64_t>(threads, b));
  std::vector<std::vector<std::int64_t>> parts(static_cast<std::size_t>(used));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(used));
  const auto guarded = [&](std::int64_t lo, std::int64_t hi, std::size_t slot) {
    try {
      worker(lo, hi, parts[slot]);
    } catch (...) {
      errors[slot] = std::current_exception();
    }
  };
  std::vector<std::thread> pool;
  for (int w = 1; w < used; ++w) {
    const std::int64_t lo = b * w / used, hi = b * (w + 1) / used;
    pool.emplace_back(guarded, lo, hi, static_cast<std::size_t>(w));
  }
  guarded(0, b * 1 / used, 0);
  for (auto& th : pool) th.join();
  for (const std::exception_ptr& err : errors)
    if (err) std::rethrow_exception(err);

  est.hits.assign(n_cells, 0);
  for (const auto& part : parts)
    for (std::size_t c = 0; c < n_cells; ++c) est.hits[c] += part[c];
  return est;
}

// ============================================================================
// Brute-force exact power for tiny designs
// ============================================================================

/// Exact (non-Monte-Carlo) power: sums Pr_theta(Z = z) over every outcome z
/// whose exact p-value is at most alpha.  The outcome space is the product of
/// all case-row and control-row compositions, so this is capped at
/// n1 + n2 <= 40.
inline double exact_power(const PopulationParams& theta, std::int64_t n1, std::int64_t n2,
                          StatisticKind kind, double alpha) {
  if (n1 < 1 || n2 < 1) throw std::invalid_argument("exact_power requires n1, n2 >= 1");
  if (n1 + n2 > 40)
    throw CapExceededError("exact_power supports n1 + n2 <= 40, got " +
                           std::to_string(n1 + n2));
  const auto tables = shared_enumeration_tables(n1 + n2);
  const LogFactorialTable& lf = tables->lf;
  // ln of a trinomial pmf; zero-probability cells force the whole outcome out.
  const auto ln_trinomial = [&lf](const std::array<double, 3>& probs, std::int64_t n,
                                  const std::array<std::int64_t, 3>& x) {
    double lp = lf(n);
    for (int i = 0; i < 3; ++i) {
      lp -= lf(x[i]);
      if (x[i] > 0) {
        if (!(probs[i] > 0.0)) return -std::numeric_limits<double>::infinity();
        lp += static_cast<double>(x[i]) * std::log(probs[i]);
      }
    }
    return lp;
  };
  double total = 0.0;
  for (std::int64_t x0 = 0; x0 <= n1; ++x0)
    for (std::int64_t x1 = 0; x0 + x1 <= n1; ++x1) {
      const std::array<std::int64_t, 3> x = {x0, x1, n1 - x0 - x1};
      const double lpx = ln_trinomial(theta.cases(), n1, x);
      if (lpx == -std::numeric_limits<double>::infinity()) continue;
      for (std::int64_t y0 = 0; y0 <= n2; ++y0)
        for (std::int64_t y1 = 0; y0 + y1 <= n2; ++y1) {
          const std::array<std::int64_t, 3> y = {y0, y1, n2 - y0 - y1};
          const double lpy = ln_trinomial(theta.controls(), n2, y);
          if (lpy == -std::numeric_limits<double>::infinity()) continue;
          const ContingencyTable z{x[0], x[1], x[2], y[0], y[1], y[2]};
          const ExactEnumerator kernel(margins_of(z), tables);
          if (kernel.exact_p(kind, z).rejects(alpha)) total += std::exp(lpx + lpy);
        }
    }
  return std::min(total, 1.0);
}

}  // namespace genassoc
