#pragma once

#include <cstdint>
#include <cmath>

namespace rotsym {

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

/// splitmix64: a fixed-width counter-based generator. The whole synthetic
/// pipeline draws from per-scene substreams of this engine so that output
/// is bitwise reproducible regardless of scheduling.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return detail::mix64(state_);
  }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [lo, hi], inclusive. Rejection sampling, unbiased.
  int uniform_int(int lo, int hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % span);
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return lo + static_cast<int>(r % span);
  }

  /// Standard normal deviate via the inverse CDF (Acklam's rational
  /// approximation, |relative error| < 1.15e-9). Uses only +,-,*,/ and
  /// sqrt in the central region, keeping the stream portable.
  double gaussian() {
    double p;
    do {
      p = uniform01();
    } while (p <= 0.0);
    return inverse_normal_cdf(p);
  }

  static double inverse_normal_cdf(double p);

 private:
  std::uint64_t state_;
};

/// Derives an independent substream for (seed, stream, index). Scenes use
/// index = scene number; stream separates generation from perturbation.
inline SplitMix64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const std::uint64_t s =
      detail::mix64(detail::mix64(seed) ^ detail::mix64(stream * 0x9e3779b97f4a7c15ull + 1) ^
                    detail::mix64(index + 0x632be59bd9b4e019ull));
  return SplitMix64(s);
}

inline double SplitMix64::inverse_normal_cdf(double p) {
  // Acklam (2003); the standard low/central/high three-piece form.
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  static constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  const double q = std::sqrt(-2.0 * std::log(1.0 - p));
  return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
         ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace rotsym
