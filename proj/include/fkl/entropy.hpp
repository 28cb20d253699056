#pragma once

// Scalar entropy functions and log-domain combinatorics shared by every
// other header in the library. All entropies are in bits unless the name
// says otherwise; d-ary entropies are in base d.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace fkl {

namespace detail {

inline constexpr double kDomainTolerance = 1e-12;

// Clamps x into [0,1] when it lies within kDomainTolerance of the interval,
// throws otherwise.
inline double clamp_unit(double x, const char* what) {
  if (!(x >= -kDomainTolerance && x <= 1.0 + kDomainTolerance)) {
    throw std::domain_error(std::string(what) + ": argument " + std::to_string(x) +
                            " outside [0,1]");
  }
  return std::clamp(x, 0.0, 1.0);
}

// -x log2 x with 0 log 0 := 0.
inline double neg_xlog2x(double x) { return x > 0.0 ? -x * std::log2(x) : 0.0; }

}  // namespace detail

/// Binary Shannon entropy h(x) in bits.
inline double binary_entropy(double x) {
  x = detail::clamp_unit(x, "binary_entropy");
  return detail::neg_xlog2x(x) + detail::neg_xlog2x(1.0 - x);
}

/// d-ary entropy H_d(x) = x log_d(d-1) - x log_d x - (1-x) log_d(1-x), in base d.
/// Maximal (= 1) at x = 1 - 1/d; equals binary_entropy for d = 2.
inline double d_ary_entropy(double x, int d) {
  if (d < 2) throw std::domain_error("d_ary_entropy: alphabet size must be >= 2");
  x = detail::clamp_unit(x, "d_ary_entropy");
  const double bits = x * std::log2(static_cast<double>(d - 1)) + binary_entropy(x);
  return bits / std::log2(static_cast<double>(d));
}

/// Extended d-ary entropy: H_d on [0, 1-1/d], 0 below, 1 above. Total on the reals.
inline double extended_d_ary_entropy(double x, int d) {
  if (d < 2) throw std::domain_error("extended_d_ary_entropy: alphabet size must be >= 2");
  if (std::isnan(x)) throw std::domain_error("extended_d_ary_entropy: NaN argument");
  if (x < 0.0) return 0.0;
  if (x > 1.0 - 1.0 / d) return 1.0;
  return d_ary_entropy(x, d);
}

/// A finite probability distribution whose entries are non-negative and sum
/// to one within 1e-12.
class ProbabilityDistribution {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit ProbabilityDistribution(std::vector<double> probabilities)
      : probabilities_(std::move(probabilities)) {
    if (probabilities_.empty()) {
      throw std::invalid_argument("ProbabilityDistribution: empty support");
    }
    double sum = 0.0;
    for (double p : probabilities_) {
      if (!(p >= 0.0)) throw std::invalid_argument("ProbabilityDistribution: negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw std::invalid_argument("ProbabilityDistribution: entries sum to " +
                                  std::to_string(sum) + ", not 1");
    }
  }

  static ProbabilityDistribution uniform(int d) {
    return ProbabilityDistribution(std::vector<double>(static_cast<std::size_t>(d), 1.0 / d));
  }

  [[nodiscard]] std::span<const double> probabilities() const { return probabilities_; }
  [[nodiscard]] int size() const { return static_cast<int>(probabilities_.size()); }
  [[nodiscard]] double operator[](std::size_t i) const { return probabilities_[i]; }

 private:
  std::vector<double> probabilities_;
};

/// Shannon entropy in bits.
inline double shannon_entropy(const ProbabilityDistribution& p) {
  double h = 0.0;
  for (double v : p.probabilities()) h += detail::neg_xlog2x(v);
  return h;
}

namespace detail {

inline constexpr double kStirlingShift = 15.0;

// Stirling series for ln Gamma(x), accurate to double precision for x >= 15.
inline double stirling_tail(double x) {
  const double r = 1.0 / x;
  const double r2 = r * r;
  // B_{2k} / (2k (2k-1) x^{2k-1}), k = 1..6
  return r * (1.0 / 12.0 +
              r2 * (-1.0 / 360.0 +
                    r2 * (1.0 / 1260.0 +
                          r2 * (-1.0 / 1680.0 + r2 * (1.0 / 1188.0 + r2 * (-691.0 / 360360.0))))));
}

inline double log_gamma_large(double x) {
  constexpr double half_log_2pi = 0.91893853320467274178;
  return (x - 0.5) * std::log(x) - x + half_log_2pi + stirling_tail(x);
}

}  // namespace detail

/// Natural log of the Gamma function for x > 0 (Stirling series with upward
/// recurrence below x = 15).
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be > 0");
  if (x >= detail::kStirlingShift) return detail::log_gamma_large(x);
  double product = 1.0;
  double shifted = x;
  while (shifted < detail::kStirlingShift) {
    product *= shifted;
    shifted += 1.0;
  }
  return detail::log_gamma_large(shifted) - std::log(product);
}

/// ln Gamma(x + a) - ln Gamma(x + b), evaluated without cancellation for large x.
/// Used for the half-integer Gamma ratios of the ell_1 bound at x ~ 1e9.
inline double log_gamma_ratio(double x, double a, double b) {
  const double lo = x + std::min(a, b);
  if (!(lo > 0.0)) throw std::domain_error("log_gamma_ratio: arguments must be > 0");
  if (lo < detail::kStirlingShift) return log_gamma(x + a) - log_gamma(x + b);
  const double y = x + b;
  const double s = a - b;
  return s * std::log(y) + (y + s - 0.5) * std::log1p(s / y) - s +
         (detail::stirling_tail(y + s) - detail::stirling_tail(y));
}

/// log2 of the multinomial coefficient n! / prod(k_i!).
inline double log_multinomial(std::int64_t n, std::span<const std::int64_t> counts) {
  std::int64_t sum = 0;
  for (auto k : counts) {
    if (k < 0) throw std::invalid_argument("log_multinomial: negative count");
    sum += k;
  }
  if (sum != n) {
    throw std::invalid_argument("log_multinomial: counts sum to " + std::to_string(sum) +
                                ", expected " + std::to_string(n));
  }
  double ln = log_gamma(static_cast<double>(n) + 1.0);
  for (auto k : counts) ln -= log_gamma(static_cast<double>(k) + 1.0);
  return ln / std::numbers::ln2;
}

/// log2(sum 2^v) over the values, with max-shift and pairwise summation so the
/// result does not depend on how the caller partitioned the work.
inline double log2_sum_exp2(std::span<const double> values) {
  if (values.empty()) return -INFINITY;
  const double peak = *std::max_element(values.begin(), values.end());
  if (std::isinf(peak)) return peak;
  std::vector<double> terms(values.size());
  std::transform(values.begin(), values.end(), terms.begin(),
                 [peak](double v) { return std::exp2(v - peak); });
  for (std::size_t width = 1; width < terms.size(); width *= 2) {
    for (std::size_t i = 0; i + width < terms.size(); i += 2 * width) terms[i] += terms[i + width];
  }
  return peak + std::log2(terms.front());
}

}  // namespace fkl
