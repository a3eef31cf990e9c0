#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <stdexcept>

#include "genassoc/genetics.hpp"

using namespace genassoc;
using Catch::Approx;

// ============================================================================
// Hardy-Weinberg frequencies
// ============================================================================

TEST_CASE("hwe frequencies at reference allele frequencies") {
  const auto g = hwe_genotype_freqs(0.1);
  REQUIRE(g[0] == Approx(0.81).epsilon(1e-14));
  REQUIRE(g[1] == Approx(0.18).epsilon(1e-14));
  REQUIRE(g[2] == Approx(0.01).epsilon(1e-14));
  const auto h = hwe_genotype_freqs(0.5);
  REQUIRE(h[0] == Approx(0.25).epsilon(1e-14));
  REQUIRE(h[1] == Approx(0.50).epsilon(1e-14));
  REQUIRE(h[2] == Approx(0.25).epsilon(1e-14));
  REQUIRE(hwe_genotype_freqs(0.0)[0] == 1.0);
  REQUIRE(hwe_genotype_freqs(1.0)[2] == 1.0);
}

TEST_CASE("hwe frequencies reject out-of-range input") {
  REQUIRE_THROWS_AS(hwe_genotype_freqs(-0.01), std::invalid_argument);
  REQUIRE_THROWS_AS(hwe_genotype_freqs(1.01), std::invalid_argument);
  REQUIRE_THROWS_AS(hwe_genotype_freqs(std::nan("")), std::invalid_argument);
}

// ============================================================================
// Case/control distributions from the model
// ============================================================================

TEST_CASE("frozen case and control distributions, dominant model") {
  const PopulationParams t = theta_from_model({0.1, 0.1, 1.0, 2.0});
  REQUIRE(t.p0 == Approx(0.680672).margin(1e-6));
  REQUIRE(t.p1 == Approx(0.302521).margin(1e-6));
  REQUIRE(t.p2 == Approx(0.0168067).margin(1e-7));
  REQUIRE(t.q0 == Approx(0.824370).margin(1e-6));
  REQUIRE(t.q1 == Approx(0.166387).margin(1e-6));
  REQUIRE(t.q2 == Approx(0.00924370).margin(1e-8));
}

TEST_CASE("frozen case and control distributions, intermediate model") {
  const PopulationParams t = theta_from_model({0.1, 0.3, 0.5, 1.5});
  REQUIRE(t.p0 == Approx(0.426087).margin(1e-6));
  REQUIRE(t.p1 == Approx(0.456522).margin(1e-6));
  REQUIRE(t.p2 == Approx(0.117391).margin(1e-6));
  REQUIRE(t.q0 == Approx(0.497101).margin(1e-6));
  REQUIRE(t.q1 == Approx(0.415942).margin(1e-6));
  REQUIRE(t.q2 == Approx(0.0869565).margin(1e-7));
}

TEST_CASE("unit relative risk collapses both rows to the genotype frequencies") {
  for (double delta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const PopulationParams t = theta_from_model({0.1, 0.1, delta, 1.0});
    const auto g = hwe_genotype_freqs(0.1);
    REQUIRE(t.p0 == Approx(g[0]).epsilon(1e-14));
    REQUIRE(t.p1 == Approx(g[1]).epsilon(1e-14));
    REQUIRE(t.p2 == Approx(g[2]).epsilon(1e-14));
    REQUIRE(t.q0 == Approx(g[0]).epsilon(1e-14));
    REQUIRE(t.q1 == Approx(g[1]).epsilon(1e-14));
    REQUIRE(t.q2 == Approx(g[2]).epsilon(1e-14));
  }
}

TEST_CASE("distributions are probabilities and mix back to the genotype law") {
  for (double k : {0.05, 0.1, 0.2})
    for (double maf : {0.1, 0.3, 0.5})
      for (double delta : {0.0, 0.5, 1.0})
        for (double lambda2 : {1.0, 1.2, 2.0}) {
          const PopulationParams t = theta_from_model({k, maf, delta, lambda2});
          const auto g = hwe_genotype_freqs(maf);
          const auto p = t.cases();
          const auto q = t.controls();
          double sp = 0.0, sq = 0.0;
          for (int i = 0; i < 3; ++i) {
            REQUIRE(p[i] >= 0.0);
            REQUIRE(q[i] >= 0.0);
            sp += p[i];
            sq += q[i];
            // law of total probability: k p_i + (1-k) q_i = g_i
            REQUIRE(k * p[i] + (1.0 - k) * q[i] == Approx(g[i]).epsilon(1e-12));
          }
          REQUIRE(sp == Approx(1.0).epsilon(1e-12));
          REQUIRE(sq == Approx(1.0).epsilon(1e-12));
          REQUIRE(is_monotone(t));
        }
}

TEST_CASE("recessive and dominant endpoints share the expected penetrances") {
  // delta = 0: heterozygote risk equals baseline, so p1/g1 == p0/g0
  const PopulationParams rec = theta_from_model({0.1, 0.3, 0.0, 2.0});
  const auto g = hwe_genotype_freqs(0.3);
  REQUIRE(rec.p1 * g[0] == Approx(rec.p0 * g[1]).epsilon(1e-12));
  // delta = 1: heterozygote risk equals homozygote risk, so p1/g1 == p2/g2
  const PopulationParams dom = theta_from_model({0.1, 0.3, 1.0, 2.0});
  REQUIRE(dom.p1 * g[2] == Approx(dom.p2 * g[1]).epsilon(1e-12));
}

TEST_CASE("impossible penetrance raises the tagged overflow error") {
  REQUIRE_THROWS_AS(theta_from_model({0.6, 0.1, 1.0, 2.0}), PenetranceOverflowError);
  try {
    theta_from_model({0.6, 0.1, 1.0, 2.0});
    FAIL("expected PenetranceOverflowError");
  } catch (const PenetranceOverflowError& e) {
    REQUIRE(std::strncmp(e.what(), "PENETRANCE_OVERFLOW: ", 21) == 0);
  }
  // and the error is a domain_error, distinct from parameter validation
  REQUIRE_THROWS_AS(theta_from_model({0.6, 0.1, 1.0, 2.0}), std::domain_error);
}

TEST_CASE("parameter validation") {
  REQUIRE_THROWS_AS(theta_from_model({0.0, 0.1, 0.5, 2.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(theta_from_model({1.0, 0.1, 0.5, 2.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(theta_from_model({0.1, -0.1, 0.5, 2.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(theta_from_model({0.1, 0.1, 1.5, 2.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(theta_from_model({0.1, 0.1, 0.5, 0.9}), std::invalid_argument);
}

// ============================================================================
// Likelihood-ratio ordering
// ============================================================================

TEST_CASE("monotone ordering detection") {
  REQUIRE(is_monotone({0.2, 0.3, 0.5, 0.5, 0.3, 0.2}));
  REQUIRE(is_monotone({1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3, 1.0 / 3}));
  // anti-monotone: risk decreases with allele count
  REQUIRE_FALSE(is_monotone({0.5, 0.3, 0.2, 0.2, 0.3, 0.5}));
  // over-dominant: heterozygote excess in cases breaks the ordering
  REQUIRE_FALSE(is_monotone({0.3, 0.5, 0.2, 0.4, 0.3, 0.3}));
  // zero cells compare as 0/0 and do not break the ordering
  REQUIRE(is_monotone({0.7, 0.3, 0.0, 0.8, 0.2, 0.0}));
}
