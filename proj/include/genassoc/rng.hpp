#pragma once
// Counter-based random numbers for reproducible parallel simulation.  The
// generator is Philox4x64-10 (verified against the reference implementation's
// output vectors); every (seed, stream) pair yields an independent sequence
// that is a pure function of its position, so partitioning replicates across
// threads can never change results.  Discrete samplers draw binomial and
// hypergeometric variates by mode-centred inversion, which stays exact and
// deterministic across platforms.

#include <array>
#include <cmath>
#include <cstdint>

namespace genassoc {

// ============================================================================
// Philox4x64-10
// ============================================================================

class PhiloxRng {
 public:
  /// One stream of the keyed generator.  Typical use keys the seed and uses
  /// the replicate index as the stream.
  PhiloxRng(std::uint64_t seed, std::uint64_t stream) : key_{seed, kKeyTweak}, stream_(stream) {}

  /// The raw 10-round block function: 4 output words from (counter, key).
  static std::array<std::uint64_t, 4> philox_block(std::array<std::uint64_t, 4> ctr,
                                                   std::array<std::uint64_t, 2> key) {
    for (int round = 0; round < 10; ++round) {
      std::uint64_t hi0, lo0, hi1, lo1;
      mulhilo(kMult0, ctr[0], hi0, lo0);
      mulhilo(kMult1, ctr[2], hi1, lo1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
      key[0] += kWeyl0;
      key[1] += kWeyl1;
    }
    return ctr;
  }

  std::uint64_t next_u64() {
    if (pos_ == 4) {
      buf_ = philox_block({block_++, 0, stream_, 0}, key_);
      pos_ = 0;
    }
    return buf_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in the open interval (0, 1); safe under log().
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// One standard normal pair by Box-Muller.
  std::array<double, 2> normal_pair() {
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double a = 2.0 * M_PI * uniform();
    return {r * std::cos(a), r * std::sin(a)};
  }

 private:
  static constexpr std::uint64_t kMult0 = 0xD2E7470EE14C6C93ull;
  static constexpr std::uint64_t kMult1 = 0xCA5A826395121157ull;
  static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ull;
  static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73Bull;
  static constexpr std::uint64_t kKeyTweak = 0x67656E6173736F63ull;  // second key word

  static void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 p = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(p >> 64);
    lo = static_cast<std::uint64_t>(p);
  }

  std::array<std::uint64_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 4> buf_{};
  int pos_ = 4;
};

// ============================================================================
// Discrete samplers (mode-centred inversion)
// ============================================================================
// Both samplers locate the distribution mode, then accumulate probability
// mass outward in a two-sided zigzag until the uniform draw is covered.  The
// expected number of steps is O(standard deviation); pmf values update by
// exact one-step ratios from a single log-pmf evaluation at the mode.

namespace detail {

inline double ln_choose_lgamma(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace detail

/// Binomial(n, p) sampler; construction cost is one log-pmf evaluation.
class BinomialSampler {
 public:
  BinomialSampler(std::int64_t n, double p) : n_(n), p_(p) {
    if (n_ < 0) n_ = 0;
    if (p_ <= 0.0 || p_ >= 1.0 || n_ == 0) return;  // degenerate: draw() short-circuits
    mode_ = static_cast<std::int64_t>((static_cast<double>(n_) + 1.0) * p_);
    if (mode_ > n_) mode_ = n_;
    pmode_ = std::exp(detail::ln_choose_lgamma(static_cast<double>(n_), static_cast<double>(mode_)) +
                      static_cast<double>(mode_) * std::log(p_) +
                      static_cast<double>(n_ - mode_) * std::log1p(-p_));
    odds_ = p_ / (1.0 - p_);
  }

  template <class Rng>
  std::int64_t draw(Rng& rng) const {
    if (p_ <= 0.0 || n_ == 0) return 0;
    if (p_ >= 1.0) return n_;
    const double u = rng.uniform();
    std::int64_t lo = mode_, hi = mode_;
    double plo = pmode_, phi = pmode_;
    double cum = pmode_;
    if (u < cum) return mode_;
    while (lo > 0 || hi < n_) {
      if (hi < n_) {
        phi *= static_cast<double>(n_ - hi) / static_cast<double>(hi + 1) * odds_;
        ++hi;
        cum += phi;
        if (u < cum) return hi;
      }
      if (lo > 0) {
        plo *= static_cast<double>(lo) / (static_cast<double>(n_ - lo + 1) * odds_);
        --lo;
        cum += plo;
        if (u < cum) return lo;
      }
    }
    return mode_;  // u beyond accumulated mass (rounding); probability ~2^-52
  }

 private:
  std::int64_t n_;
  double p_;
  std::int64_t mode_ = 0;
  double pmode_ = 1.0;
  double odds_ = 0.0;
};

/// Hypergeometric sampler: number of marked items among n_draws draws without
/// replacement from a population of n_total with n_marked marked.
class HypergeometricSampler {
 public:
  HypergeometricSampler(std::int64_t n_total, std::int64_t n_marked, std::int64_t n_draws)
      : total_(n_total), marked_(n_marked), draws_(n_draws) {
    lo_bound_ = std::max<std::int64_t>(0, draws_ - (total_ - marked_));
    hi_bound_ = std::min(marked_, draws_);
    mode_ = static_cast<std::int64_t>(static_cast<double>(draws_ + 1) *
                                      static_cast<double>(marked_ + 1) /
                                      static_cast<double>(total_ + 2));
    if (mode_ < lo_bound_) mode_ = lo_bound_;
    if (mode_ > hi_bound_) mode_ = hi_bound_;
    const double K = static_cast<double>(marked_), n = static_cast<double>(draws_);
    const double k = static_cast<double>(mode_);
    pmode_ = std::exp(detail::ln_choose_lgamma(K, k) +
                      detail::ln_choose_lgamma(static_cast<double>(total_) - K, n - k) -
                      detail::ln_choose_lgamma(static_cast<double>(total_), n));
  }

  template <class Rng>
  std::int64_t draw(Rng& rng) const {
    if (lo_bound_ == hi_bound_) return lo_bound_;
    const double u = rng.uniform();
    std::int64_t lo = mode_, hi = mode_;
    double plo = pmode_, phi = pmode_;
    double cum = pmode_;
    if (u < cum) return mode_;
    while (lo > lo_bound_ || hi < hi_bound_) {
      if (hi < hi_bound_) {
        // p(k+1)/p(k) = (K-k)(n-k) / ((k+1)(T-K-n+k+1))
        phi *= static_cast<double>(marked_ - hi) * static_cast<double>(draws_ - hi) /
               (static_cast<double>(hi + 1) *
                static_cast<double>(total_ - marked_ - draws_ + hi + 1));
        ++hi;
        cum += phi;
        if (u < cum) return hi;
      }
      if (lo > lo_bound_) {
        plo *= static_cast<double>(lo) * static_cast<double>(total_ - marked_ - draws_ + lo) /
               (static_cast<double>(marked_ - lo + 1) * static_cast<double>(draws_ - lo + 1));
        --lo;
        cum += plo;
        if (u < cum) return lo;
      }
    }
    return mode_;  // rounding fallback as in BinomialSampler
  }

 private:
  std::int64_t total_, marked_, draws_;
  std::int64_t lo_bound_ = 0, hi_bound_ = 0;
  std::int64_t mode_ = 0;
  double pmode_ = 1.0;
};

}  // namespace genassoc
