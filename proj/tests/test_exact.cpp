#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "genassoc/exact.hpp"

using namespace genassoc;
using Catch::Approx;

namespace {

// --------------------------------------------------------------------------
// Independent brute-force oracle: naive statistics (the scalar functions in
// statistics.hpp, not the kernel's precomputed forms), naive lgamma
// probabilities, and the pinned tie rule applied verbatim.
// --------------------------------------------------------------------------

double naive_prob(const ContingencyTable& z) {
  const Margins m = margins_of(z);
  const auto lc = [](std::int64_t n, std::int64_t k) {
    return std::lgamma(double(n) + 1) - std::lgamma(double(k) + 1) -
           std::lgamma(double(n - k) + 1);
  };
  return std::exp(lc(m.m0, z.x0) + lc(m.m1, z.x1) + lc(m.m2, z.x2) -
                  lc(m.total(), m.n1));
}

std::array<double, kStatisticCount> naive_stats(const ContingencyTable& z) {
  std::array<double, kStatisticCount> out{};
  for (StatisticKind k : kAllStatistics) out[statistic_index(k)] = evaluate(k, z);
  return out;
}

std::array<double, kStatisticCount> oracle_exact_p(const ContingencyTable& z) {
  const Margins m = margins_of(z);
  const auto tobs = naive_stats(z);
  std::array<double, kStatisticCount> sum{};
  for_each_table(m, [&](const ContingencyTable& t) {
    const double prob = naive_prob(t);
    const auto v = naive_stats(t);
    for (std::size_t k = 0; k < kStatisticCount; ++k) {
      const double tol = 1e-12 * std::fabs(tobs[k]);
      const bool in =
          rejection_direction(kAllStatistics[k]) == RejectionDirection::LargeRejects
              ? v[k] >= tobs[k] - tol
              : v[k] <= tobs[k] + tol;
      if (in) sum[k] += prob;
    }
  });
  for (double& s : sum) s = std::min(s, 1.0);
  return sum;
}

void check_against_oracle(const Margins& m) {
  ExactEnumerator kernel(m, shared_enumeration_tables(m.total()));
  for_each_table(m, [&](const ContingencyTable& z) {
    const auto expected = oracle_exact_p(z);
    const ExactReport got = kernel.exact_p_all(z);
    REQUIRE_FALSE(got.aborted);
    REQUIRE(got.summands == count_tables(m));
    for (std::size_t k = 0; k < kStatisticCount; ++k) {
      REQUIRE_FALSE(got.p[k].aborted());
      REQUIRE(got.p[k].p() == Approx(expected[k]).epsilon(1e-10).margin(1e-12));
    }
  });
}

ContingencyTable random_table(std::mt19937& gen, std::int64_t max_cell) {
  std::uniform_int_distribution<std::int64_t> cell(0, max_cell);
  while (true) {
    const ContingencyTable z{cell(gen), cell(gen), cell(gen),
                             cell(gen), cell(gen), cell(gen)};
    if (z.n1() >= 1 && z.n2() >= 1) return z;
  }
}

}  // namespace

// ============================================================================
// Lookup tables
// ============================================================================

TEST_CASE("log-factorial and x log x tables") {
  const LogFactorialTable lf(50);
  REQUIRE(lf(0) == 0.0);
  REQUIRE(lf(1) == Approx(0.0).margin(1e-14));
  REQUIRE(lf(5) == Approx(std::log(120.0)).epsilon(1e-13));
  REQUIRE(lf.max_n() == 50);
  for (std::int64_t n = 1; n <= 50; ++n)
    REQUIRE(lf(n) == Approx(lf(n - 1) + std::log(double(n))).epsilon(1e-12));
  const XLogXTable xlx(20);
  REQUIRE(xlx(0) == 0.0);
  REQUIRE(xlx(1) == Approx(0.0).margin(1e-14));
  REQUIRE(xlx(3) == Approx(3.0 * std::log(3.0)).epsilon(1e-14));
}

TEST_CASE("shared tables grow monotonically and snapshots stay valid") {
  const auto a = shared_enumeration_tables(100);
  REQUIRE(a->lf.max_n() >= 1024);  // growth floor
  const auto b = shared_enumeration_tables(500);
  REQUIRE(a.get() == b.get());  // no rebuild when already large enough
  const auto c = shared_enumeration_tables(a->lf.max_n() + 1);
  REQUIRE(c->lf.max_n() >= a->lf.max_n() + 1);
  REQUIRE(std::isfinite(a->lf(100)));  // old snapshot untouched
}

// ============================================================================
// Hypergeometric probabilities
// ============================================================================

TEST_CASE("conditional table probabilities") {
  const auto tables = shared_enumeration_tables(600);
  REQUIRE(hypergeometric_prob({2, 0, 0, 0, 1, 1}, tables->lf) == Approx(1.0 / 6).epsilon(1e-12));
  REQUIRE(hypergeometric_prob({1, 1, 0, 1, 0, 1}, tables->lf) == Approx(1.0 / 3).epsilon(1e-12));
  REQUIRE(hypergeometric_prob({2, 0, 0, 1, 0, 0}, tables->lf) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("probabilities sum to one over each margin family") {
  std::mt19937 gen(77);
  const auto tables = shared_enumeration_tables(600);
  for (int trial = 0; trial < 30; ++trial) {
    const Margins m = margins_of(random_table(gen, 12));
    double total = 0.0;
    for_each_table(m, [&](const ContingencyTable& z) {
      const double p = hypergeometric_prob(z, tables->lf);
      REQUIRE(p >= 0.0);
      REQUIRE(p <= 1.0 + 1e-12);
      total += p;
    });
    REQUIRE(total == Approx(1.0).epsilon(1e-11));
  }
  // one larger family
  const Margins big{250, 150, 100, 200, 300};
  double total = 0.0;
  for_each_table(big, [&](const ContingencyTable& z) {
    total += hypergeometric_prob(z, tables->lf);
  });
  REQUIRE(total == Approx(1.0).epsilon(1e-10));
}

// ============================================================================
// ExactPValue semantics
// ============================================================================

TEST_CASE("exact p-value wrapper semantics") {
  const ExactPValue e = ExactPValue::exact(0.3);
  REQUIRE_FALSE(e.aborted());
  REQUIRE(e.p() == 0.3);
  REQUIRE(e.bound() == 0.3);
  REQUIRE(e.rejects(0.3));
  REQUIRE_FALSE(e.rejects(0.29));
  const ExactPValue a = ExactPValue::aborted_at(0.05);
  REQUIRE(a.aborted());
  REQUIRE_THROWS_AS(a.p(), std::logic_error);
  REQUIRE(a.bound() == 0.05);
  REQUIRE_FALSE(a.rejects(0.05));
  REQUIRE_FALSE(a.rejects(0.01));
  const ExactPValue d;
  REQUIRE_FALSE(d.aborted());
  REQUIRE(d.p() == 1.0);
}

// ============================================================================
// Exact p-values: frozen examples
// ============================================================================

TEST_CASE("frozen single-table exact p-values") {
  REQUIRE(exact_p(StatisticKind::Pearson, {2, 0, 0, 0, 1, 1}).p() ==
          Approx(1.0 / 3).epsilon(1e-12));
  // a case-control-identical table is the null mode: every p is 1
  const ExactReport balanced = exact_p_all({5, 5, 5, 5, 5, 5});
  for (StatisticKind k : kAllStatistics) REQUIRE(balanced[k].p() == Approx(1.0).epsilon(1e-12));
  // two-table family whose members mirror each other: everything ties
  const ExactReport mirror = exact_p_all({1, 0, 0, 0, 1, 0});
  for (StatisticKind k : kAllStatistics) REQUIRE(mirror[k].p() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kernel statistics agree with the scalar statistic functions") {
  std::mt19937 gen(123);
  for (int i = 0; i < 150; ++i) {
    const ContingencyTable z = random_table(gen, 40);
    const Margins m = margins_of(z);
    ExactEnumerator kernel(m, shared_enumeration_tables(m.total()));
    const auto kv = kernel.statistics(z.x0, z.x1);
    const auto nv = naive_stats(z);
    for (std::size_t k = 0; k < kStatisticCount; ++k)
      REQUIRE(kv[k] == Approx(nv[k]).epsilon(1e-10).margin(1e-10));
    REQUIRE(std::exp(kernel.log_prob(z.x0, z.x1)) ==
            Approx(naive_prob(z)).epsilon(1e-11));
  }
}

// ============================================================================
// Exact p-values: brute-force oracle
// ============================================================================

TEST_CASE("exact p-values match the brute-force oracle on all small margins") {
  for (std::int64_t N = 2; N <= 9; ++N)
    for (std::int64_t n1 = 1; n1 < N; ++n1)
      for (std::int64_t m0 = 0; m0 <= N; ++m0)
        for (std::int64_t m1 = 0; m1 + m0 <= N; ++m1)
          check_against_oracle(Margins{m0, m1, N - m0 - m1, n1, N - n1});
}

TEST_CASE("exact p-values match the brute-force oracle on a larger margin set") {
  check_against_oracle(Margins{6, 5, 3, 7, 7});
}

// ============================================================================
// Abort semantics
// ============================================================================

TEST_CASE("single-statistic enumeration aborts exactly when p exceeds theta") {
  const ContingencyTable z{4, 3, 1, 2, 3, 5};
  for (StatisticKind kind : {StatisticKind::Pearson, StatisticKind::Min2, StatisticKind::Clrt}) {
    const double full = exact_p(kind, z).p();
    for (double theta : {0.001, 0.01, 0.05, 0.2, 0.5, 0.9, 1.0}) {
      const ExactPValue r = exact_p(kind, z, {theta, EnumerationOrder::ProbabilitySweep});
      if (full > theta) {
        REQUIRE(r.aborted());
        REQUIRE(r.bound() == theta);
      } else {
        REQUIRE_FALSE(r.aborted());
        REQUIRE(r.p() == full);  // same sweep, same sums: bitwise equal
      }
    }
  }
}

TEST_CASE("multi-statistic abort waits for every tracked sum") {
  // strongly significant table: small p-values keep the pass alive to the end
  const ContingencyTable sig{10, 20, 30, 30, 20, 10};
  const ExactReport no_abort = exact_p_all(sig);
  const ExactReport with_theta = exact_p_all(sig, {0.05, EnumerationOrder::ProbabilitySweep});
  REQUIRE_FALSE(with_theta.aborted);
  REQUIRE(with_theta.summands == count_tables(margins_of(sig)));
  for (std::size_t k = 0; k < kStatisticCount; ++k)
    REQUIRE(with_theta.p[k].p() == no_abort.p[k].p());
  // null-mode table: every sum crosses theta quickly
  const ContingencyTable null_mode{10, 10, 10, 10, 10, 10};
  const ExactReport aborted = exact_p_all(null_mode, {0.05, EnumerationOrder::ProbabilitySweep});
  REQUIRE(aborted.aborted);
  REQUIRE(aborted.summands < count_tables(margins_of(null_mode)));
  for (std::size_t k = 0; k < kStatisticCount; ++k) {
    REQUIRE(aborted.p[k].aborted());
    REQUIRE(aborted.p[k].bound() == 0.05);
    REQUIRE_FALSE(aborted.p[k].rejects(0.05));
  }
}

TEST_CASE("enumeration order does not change completed p-values") {
  std::mt19937 gen(2025);
  for (int i = 0; i < 20; ++i) {
    const ContingencyTable z = random_table(gen, 10);
    const ExactReport sweep = exact_p_all(z, {{}, EnumerationOrder::ProbabilitySweep});
    const ExactReport lex = exact_p_all(z, {{}, EnumerationOrder::Lexicographic});
    REQUIRE_FALSE(sweep.aborted);
    REQUIRE_FALSE(lex.aborted);
    REQUIRE(sweep.summands == lex.summands);
    REQUIRE(sweep.summands == count_tables(margins_of(z)));
    for (std::size_t k = 0; k < kStatisticCount; ++k)
      REQUIRE(sweep.p[k].p() == Approx(lex.p[k].p()).epsilon(1e-12).margin(1e-15));
  }
}

TEST_CASE("single-kind results equal the multi-kind pass") {
  std::mt19937 gen(4);
  for (int i = 0; i < 10; ++i) {
    const ContingencyTable z = random_table(gen, 8);
    const ExactReport all = exact_p_all(z);
    for (StatisticKind k : kAllStatistics)
      REQUIRE(exact_p(k, z).p() == all[k].p());
  }
}

// ============================================================================
// Kernel validation
// ============================================================================

TEST_CASE("kernel rejects mismatched inputs") {
  const Margins m{3, 2, 1, 3, 3};
  ExactEnumerator kernel(m, shared_enumeration_tables(6));
  REQUIRE_THROWS_AS(kernel.exact_p_all({5, 5, 5, 5, 5, 5}), std::invalid_argument);
  REQUIRE_THROWS_AS(ExactEnumerator(Margins{3, 2, 1, 0, 6}, shared_enumeration_tables(6)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      ExactEnumerator(Margins{300, 200, 100, 300, 300},
                      std::make_shared<const EnumerationTables>(10)),
      std::domain_error);
}

// ============================================================================
// Permutation estimates
// ============================================================================

TEST_CASE("permutation estimates are deterministic in the seed") {
  const ContingencyTable z{4, 3, 1, 2, 3, 5};
  const double a = permutation_p(StatisticKind::Max3, z, 500, 11);
  const double b = permutation_p(StatisticKind::Max3, z, 500, 11);
  REQUIRE(a == b);
  REQUIRE_THROWS_AS(permutation_p(StatisticKind::Max3, z, 0, 11), std::invalid_argument);
}

TEST_CASE("forced margins make every permutation draw a tie") {
  // all mass in one genotype class: the case row is forced
  REQUIRE(permutation_p(StatisticKind::Pearson, {2, 0, 0, 1, 0, 0}, 1, 3) == 1.0);
  REQUIRE(permutation_p(StatisticKind::Min2, {2, 0, 0, 1, 0, 0}, 50, 3) == 1.0);
}

TEST_CASE("permutation estimates converge to the exact p-value") {
  const ContingencyTable z{2, 0, 0, 0, 1, 1};
  const std::int64_t b = 200000;
  {
    const double exact = exact_p(StatisticKind::Pearson, z).p();  // 1/3
    const double est = permutation_p(StatisticKind::Pearson, z, b, 99);
    const double se = std::sqrt(exact * (1.0 - exact) / double(b));
    REQUIRE(est == Approx(exact).margin(3.0 * se + 2.0 / double(b)));
  }
  {
    const double exact = exact_p(StatisticKind::Min2, z).p();
    const double est = permutation_p(StatisticKind::Min2, z, b, 100);
    const double se = std::sqrt(exact * (1.0 - exact) / double(b));
    REQUIRE(est == Approx(exact).margin(3.0 * se + 2.0 / double(b)));
  }
}
