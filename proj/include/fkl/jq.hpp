#pragma once

// Bounds on log2 |J_q|, the number of n-symbol words whose relative character
// counts stay within delta of the observed counts c:
//
//   F  the multinomial-volume bound (valid for delta < 1/d),
//   G  the Hamming-ball bound around the most frequent symbol,
//
// plus the exact composition-sum count and the large-n diagnostics.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fkl/entropy.hpp"
#include "fkl/random.hpp"
#include "fkl/sampling.hpp"

namespace fkl {

/// Relative character counts c(q) of a d-ary word. When `sample_size` is set
/// the counts came from an actual word of that length.
class CountVector {
 public:
  static constexpr double kSumTolerance = 1e-12;
  static constexpr double kIntegralTolerance = 1e-9;

  explicit CountVector(std::vector<double> fractions,
                       std::optional<std::int64_t> sample_size = std::nullopt)
      : fractions_(std::move(fractions)), sample_size_(sample_size) {
    if (fractions_.size() < 2) throw std::invalid_argument("CountVector: needs d >= 2 entries");
    double sum = 0.0;
    for (double c : fractions_) {
      if (!(c >= 0.0 && c <= 1.0)) throw std::invalid_argument("CountVector: entry outside [0,1]");
      sum += c;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw std::invalid_argument("CountVector: fractions sum to " + std::to_string(sum));
    }
    if (sample_size_) {
      if (*sample_size_ < 1) throw std::invalid_argument("CountVector: sample size must be >= 1");
      for (double c : fractions_) {
        const double scaled = c * static_cast<double>(*sample_size_);
        if (std::abs(scaled - std::round(scaled)) > kIntegralTolerance) {
          throw std::invalid_argument("CountVector: c_i * m is not an integer");
        }
      }
    }
  }

  static CountVector from_counts(std::span<const std::int64_t> counts) {
    std::int64_t total = 0;
    for (auto k : counts) {
      if (k < 0) throw std::invalid_argument("CountVector: negative count");
      total += k;
    }
    if (total == 0) throw std::invalid_argument("CountVector: empty word");
    std::vector<double> fractions(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      fractions[i] = static_cast<double>(counts[i]) / static_cast<double>(total);
    }
    return CountVector(std::move(fractions), total);
  }

  static CountVector from_word(const Word& word, int d) {
    if (d < 2) throw std::invalid_argument("CountVector: alphabet size must be >= 2");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(d), 0);
    for (int s : word) {
      if (s < 0 || s >= d) throw std::invalid_argument("CountVector: symbol outside the alphabet");
      ++counts[static_cast<std::size_t>(s)];
    }
    return from_counts(counts);
  }

  [[nodiscard]] int d() const { return static_cast<int>(fractions_.size()); }
  [[nodiscard]] std::span<const double> fractions() const { return fractions_; }
  [[nodiscard]] double operator[](std::size_t i) const { return fractions_[i]; }
  [[nodiscard]] std::optional<std::int64_t> sample_size() const { return sample_size_; }

  /// Index of the largest fraction; ties go to the lowest index.
  [[nodiscard]] int argmax() const {
    return static_cast<int>(std::max_element(fractions_.begin(), fractions_.end()) -
                            fractions_.begin());
  }

  [[nodiscard]] std::vector<std::int64_t> absolute_counts() const {
    if (!sample_size_) throw std::logic_error("CountVector: no sample size attached");
    std::vector<std::int64_t> counts(fractions_.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
      counts[i] = std::llround(fractions_[i] * static_cast<double>(*sample_size_));
    }
    return counts;
  }

 private:
  std::vector<double> fractions_;
  std::optional<std::int64_t> sample_size_;
};

struct JqBoundReport {
  std::optional<double> log_F;  // absent when delta >= 1/d
  double log_G = 0.0;
  double log_min = 0.0;
  std::optional<double> log_exact;
  std::int64_t n = 0;
  double delta = 0.0;
  std::vector<double> nu;
};

inline std::vector<double> nu_vector(const CountVector& c, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("nu_vector: delta must be > 0");
  std::vector<double> nu(c.fractions().begin(), c.fractions().end());
  for (double& v : nu) v = std::max(v - delta, 0.0);
  return nu;
}

inline double log_Jq_F(const CountVector& c, std::int64_t n, double delta) {
  const int d = c.d();
  if (n < 1) throw std::invalid_argument("log_Jq_F: n must be >= 1");
  if (!(delta > 0.0 && delta < 1.0 / d)) {
    throw std::domain_error("log_Jq_F: requires 0 < delta < 1/d");
  }
  const double nd = static_cast<double>(n);
  double entropy_term = 0.0;
  double nu_sum = 0.0;
  for (double v : nu_vector(c, delta)) {
    entropy_term += detail::neg_xlog2x(v);
    nu_sum += v;
  }
  return nd * entropy_term + nd * std::log2(nd) * (1.0 - nu_sum) +
         (d + 1) * std::numbers::log2e - 0.5 * d * std::log2((1.0 - d * delta) / d);
}

inline double log_Jq_G(const CountVector& c, std::int64_t n, double delta) {
  if (n < 1) throw std::invalid_argument("log_Jq_G: n must be >= 1");
  const int d = c.d();
  const double nu_a = std::max(c[static_cast<std::size_t>(c.argmax())] - delta, 0.0);
  return static_cast<double>(n) * extended_d_ary_entropy(1.0 - nu_a, d) *
         std::log2(static_cast<double>(d));
}

inline JqBoundReport log_Jq_bound(const CountVector& c, std::int64_t n, double delta) {
  JqBoundReport report;
  report.n = n;
  report.delta = delta;
  report.nu = nu_vector(c, delta);
  report.log_G = log_Jq_G(c, n, delta);
  report.log_min = report.log_G;
  if (delta < 1.0 / c.d()) {
    report.log_F = log_Jq_F(c, n, delta);
    report.log_min = std::min(*report.log_F, report.log_G);
  }
  return report;
}

namespace detail {

inline constexpr double kCompositionLimit = 1e7;
// Absolute slack on the count scale when testing |k_i - n c_i| <= n delta.
inline constexpr double kBoxTolerance = 1e-9;

struct CountBox {
  std::vector<std::int64_t> lo;
  std::vector<std::int64_t> hi;
};

inline CountBox count_box(const CountVector& c, std::int64_t n, double delta) {
  const double nd = static_cast<double>(n);
  CountBox box;
  for (double ci : c.fractions()) {
    const double centre = nd * ci;
    const double radius = nd * delta + kBoxTolerance;
    box.lo.push_back(std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(centre - radius))));
    box.hi.push_back(std::min<std::int64_t>(n, static_cast<std::int64_t>(std::floor(centre + radius))));
  }
  return box;
}

// Number of compositions of n lying in the box (as a double; saturates harmlessly).
inline double count_box_compositions(const CountBox& box, std::int64_t n) {
  std::vector<double> ways(static_cast<std::size_t>(n) + 1, 0.0);
  ways[0] = 1.0;
  for (std::size_t i = 0; i < box.lo.size(); ++i) {
    std::vector<double> next(ways.size(), 0.0);
    for (std::int64_t s = 0; s <= n; ++s) {
      if (ways[static_cast<std::size_t>(s)] == 0.0) continue;
      for (std::int64_t k = box.lo[i]; k <= box.hi[i] && s + k <= n; ++k) {
        next[static_cast<std::size_t>(s + k)] += ways[static_cast<std::size_t>(s)];
      }
    }
    ways.swap(next);
  }
  return ways[static_cast<std::size_t>(n)];
}

}  // namespace detail

/// log2 of sum over K_q of n!/prod k_i!, where K_q holds the compositions k of
/// n with |k_i - n c_i| <= n delta. Returns -inf when K_q is empty.
inline double log_Jq_exact(const CountVector& c, std::int64_t n, double delta) {
  if (n < 1) throw std::invalid_argument("log_Jq_exact: n must be >= 1");
  if (!(delta >= 0.0)) throw std::invalid_argument("log_Jq_exact: delta must be >= 0");
  if (n > 100000) throw std::length_error("log_Jq_exact: n too large for enumeration");
  const auto box = detail::count_box(c, n, delta);
  const double size = detail::count_box_compositions(box, n);
  if (size > detail::kCompositionLimit) {
    throw std::length_error("log_Jq_exact: " + std::to_string(size) +
                            " compositions exceed the 1e7 guard");
  }
  const std::size_t d = box.lo.size();
  std::vector<std::int64_t> suffix_lo(d + 1, 0), suffix_hi(d + 1, 0);
  for (std::size_t i = d; i-- > 0;) {
    suffix_lo[i] = suffix_lo[i + 1] + box.lo[i];
    suffix_hi[i] = suffix_hi[i + 1] + box.hi[i];
  }
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(size));
  std::vector<std::int64_t> k(d, 0);
  auto rec = [&](auto&& self, std::size_t i, std::int64_t remaining) -> void {
    if (i + 1 == d) {
      if (remaining < box.lo[i] || remaining > box.hi[i]) return;
      k[i] = remaining;
      terms.push_back(log_multinomial(n, k));
      return;
    }
    const std::int64_t from = std::max(box.lo[i], remaining - suffix_hi[i + 1]);
    const std::int64_t to = std::min(box.hi[i], remaining - suffix_lo[i + 1]);
    for (std::int64_t v = from; v <= to; ++v) {
      k[i] = v;
      self(self, i + 1, remaining - v);
    }
  };
  rec(rec, 0, n);
  return log2_sum_exp2(terms);
}

struct ConvergenceRow {
  std::int64_t n = 0;
  double delta = 0.0;
  std::optional<double> F_over_n;
  double G_over_n = 0.0;
  double shannon = 0.0;
  std::optional<double> ratio;  // F / G
};

/// F/n and G/n against H(p) along an increasing schedule of n, with expected
/// counts c = p and delta from the Psi1 inversion at m = n.
inline std::vector<ConvergenceRow> convergence_report(const ProbabilityDistribution& p,
                                                      std::span<const std::int64_t> n_schedule,
                                                      double epsilon = 1e-36) {
  if (!std::is_sorted(n_schedule.begin(), n_schedule.end())) {
    throw std::invalid_argument("convergence_report: schedule must be ascending");
  }
  const CountVector c(std::vector<double>(p.probabilities().begin(), p.probabilities().end()));
  const double h = shannon_entropy(p);
  std::vector<ConvergenceRow> rows;
  for (auto n : n_schedule) {
    ConvergenceRow row;
    row.n = n;
    row.delta = delta_for_epsilon(Strategy::Psi1, n, n, c.d(), epsilon);
    const auto report = log_Jq_bound(c, n, row.delta);
    const double nd = static_cast<double>(n);
    row.G_over_n = report.log_G / nd;
    if (report.log_F) {
      row.F_over_n = *report.log_F / nd;
      row.ratio = *report.log_F / report.log_G;
    }
    row.shannon = h;
    rows.push_back(row);
  }
  return rows;
}

struct UncertaintySample {
  double H_Z = 0.0;
  double H_X = 0.0;
  double gamma = 0.0;
};

/// Entropies of a pure state measured in the computational basis (Z) and the
/// discrete Fourier basis (X); gamma = log2 d is the mutually unbiased bound.
inline UncertaintySample maassen_uffink_demo(std::span<const std::complex<double>> amplitudes) {
  const std::size_t d = amplitudes.size();
  if (d < 2) throw std::invalid_argument("maassen_uffink_demo: dimension must be >= 2");
  double norm = 0.0;
  for (const auto& a : amplitudes) norm += std::norm(a);
  if (std::abs(norm - 1.0) > 1e-9) {
    throw std::invalid_argument("maassen_uffink_demo: state is not normalised");
  }
  UncertaintySample out;
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    out.H_Z += detail::neg_xlog2x(std::norm(amplitudes[j]));
    std::complex<double> overlap = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * k) % d) /
                           static_cast<double>(d);
      overlap += std::polar(scale, angle) * amplitudes[k];
    }
    out.H_X += detail::neg_xlog2x(std::norm(overlap));
  }
  out.gamma = std::log2(static_cast<double>(d));
  return out;
}

/// Normalised complex Gaussian vector (Haar-distributed pure state).
template <class Engine>
std::vector<std::complex<double>> random_state(int d, Engine& engine) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<std::complex<double>> psi(static_cast<std::size_t>(d));
  double norm = 0.0;
  for (auto& a : psi) {
    const double re = gauss(engine);
    const double im = gauss(engine);
    a = {re, im};
    norm += re * re + im * im;
  }
  const double inv = 1.0 / std::sqrt(norm);
  for (auto& a : psi) a *= inv;
  return psi;
}

}  // namespace fkl
