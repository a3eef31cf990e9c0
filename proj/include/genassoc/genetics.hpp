#pragma once
// Disease-model parameterization for the simulation studies: a biallelic
// locus in Hardy-Weinberg proportions, a prevalence, and genotype relative
// risks determine the genotype distributions in cases and in controls.

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace genassoc {

// ============================================================================
// Model specification
// ============================================================================

/// A penetrance model: prevalence k, risk-allele frequency maf, heterozygote
/// position delta in [0,1] interpolating the heterozygote relative risk as
/// lambda1 = 1 - delta + delta * lambda2 (delta 0 = recessive, 1/2 = additive
/// on the risk scale, 1 = dominant), and homozygote relative risk lambda2.
struct GeneticModelSpec {
  double k;
  double maf;
  double delta;
  double lambda2;
};

/// Genotype distributions conditional on disease status: p = cases,
/// q = controls, indexed by risk-allele count 0, 1, 2.
struct PopulationParams {
  double p0, p1, p2;
  double q0, q1, q2;

  std::array<double, 3> cases() const { return {p0, p1, p2}; }
  std::array<double, 3> controls() const { return {q0, q1, q2}; }
};

/// Raised when the model's baseline penetrance solution exceeds 1 for some
/// genotype, i.e. the (k, maf, lambda) combination is not a probability model.
class PenetranceOverflowError : public std::domain_error {
 public:
  explicit PenetranceOverflowError(const std::string& what)
      : std::domain_error("PENETRANCE_OVERFLOW: " + what) {}
};

// ============================================================================
// Derived quantities
// ============================================================================

/// Hardy-Weinberg genotype frequencies ((1-maf)^2, 2 maf (1-maf), maf^2).
inline std::array<double, 3> hwe_genotype_freqs(double maf) {
  if (!(maf >= 0.0 && maf <= 1.0))
    throw std::invalid_argument("allele frequency outside [0,1]");
  const double a = 1.0 - maf;
  return {a * a, 2.0 * maf * a, maf * maf};
}

/// Case/control genotype distributions implied by the model.  Penetrances are
/// f_i = f0 * lambda_i with f0 = k / (g0 + lambda1 g1 + lambda2 g2); Bayes
/// then gives p_i = f_i g_i / k and q_i = (1 - f_i) g_i / (1 - k).
inline PopulationParams theta_from_model(const GeneticModelSpec& spec) {
  if (!(spec.k > 0.0 && spec.k < 1.0))
    throw std::invalid_argument("prevalence must lie in (0,1)");
  if (!(spec.maf >= 0.0 && spec.maf <= 1.0))
    throw std::invalid_argument("allele frequency outside [0,1]");
  if (!(spec.delta >= 0.0 && spec.delta <= 1.0))
    throw std::invalid_argument("heterozygote position outside [0,1]");
  if (!(spec.lambda2 >= 1.0))
    throw std::invalid_argument("homozygote relative risk must be >= 1");
  const std::array<double, 3> g = hwe_genotype_freqs(spec.maf);
  const double lambda1 = 1.0 - spec.delta + spec.delta * spec.lambda2;
  const double f0 = spec.k / (g[0] + lambda1 * g[1] + spec.lambda2 * g[2]);
  const std::array<double, 3> f = {f0, f0 * lambda1, f0 * spec.lambda2};
  for (int i = 0; i < 3; ++i)
    if (f[i] > 1.0)
      throw PenetranceOverflowError("genotype " + std::to_string(i) + " penetrance " +
                                    std::to_string(f[i]) + " exceeds 1");
  PopulationParams theta{};
  theta.p0 = f[0] * g[0] / spec.k;
  theta.p1 = f[1] * g[1] / spec.k;
  theta.p2 = f[2] * g[2] / spec.k;
  theta.q0 = (1.0 - f[0]) * g[0] / (1.0 - spec.k);
  theta.q1 = (1.0 - f[1]) * g[1] / (1.0 - spec.k);
  theta.q2 = (1.0 - f[2]) * g[2] / (1.0 - spec.k);
  return theta;
}

/// Whether the case distribution dominates the control distribution in
/// likelihood-ratio order (p_i / q_i non-decreasing in i), the regime the
/// trend statistics are designed for.  Cross-product form, so zero
/// denominators need no special-casing; a relative slack absorbs rounding.
inline bool is_monotone(const PopulationParams& theta) {
  const std::array<double, 3> p = theta.cases(), q = theta.controls();
  for (int i = 0; i + 1 < 3; ++i) {
    const double lhs = p[i] * q[i + 1];   // ratio decreasing iff lhs > rhs
    const double rhs = p[i + 1] * q[i];
    if (lhs > rhs + 1e-12 * (lhs + rhs)) return false;
  }
  return true;
}

}  // namespace genassoc
