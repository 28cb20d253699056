#pragma once

// Bit-generation rates of a source-independent QRNG that tests a fraction of
// the N rounds in the X basis and extracts from the remaining n:
//
//   ell_ours     n log2 d - log2|J_q| - 2 log2(1/eps)
//   ell_vallone  the Gamma-ratio bound on the test counts (ell_1)
//   ell_xu       the bound driven by the mean symbol difference d0 (ell_2)

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fkl/channels.hpp"
#include "fkl/entropy.hpp"
#include "fkl/jq.hpp"
#include "fkl/sampling.hpp"

namespace fkl {

/// m from a test fraction of N; fractions like 0.07 * 1e10 are snapped to the
/// nearby integer instead of being pushed up by rounding noise.
inline std::int64_t test_size(std::int64_t N, double fraction) {
  if (!(fraction > 0.0 && fraction <= 0.5)) {
    throw std::invalid_argument("test fraction must lie in (0, 0.5]");
  }
  const double exact = fraction * static_cast<double>(N);
  const double nearest = std::round(exact);
  if (std::abs(exact - nearest) <= 1e-6 * std::max(1.0, exact)) {
    return static_cast<std::int64_t>(nearest);
  }
  return static_cast<std::int64_t>(std::ceil(exact));
}

struct QrngParams {
  std::int64_t N = 0;
  std::int64_t m = 0;
  int d = 2;
  double epsilon = 1e-36;
  double beta = 1.0 / 3.0;

  [[nodiscard]] std::int64_t n() const { return N - m; }

  static QrngParams with_test_fraction(std::int64_t N, int d, double fraction = 0.07) {
    return QrngParams{N, test_size(N, fraction), d};
  }

  void validate() const {
    if (m < 1) throw std::invalid_argument("QrngParams: m must be >= 1");
    if (m > n()) throw std::invalid_argument("QrngParams: requires m <= n = N - m");
    if (d < 2) throw std::invalid_argument("QrngParams: d must be >= 2");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("QrngParams: epsilon outside (0,1)");
    if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("QrngParams: beta outside (0, 1/2)");
  }
};

struct RateResult {
  double ell = 0.0;  // may be negative
  double rate = 0.0;  // max(ell, 0) / N
  double delta = 0.0;
  double eps_PA = 0.0;
  double failure_prob = 0.0;
  std::map<std::string, double> breakdown;
};

inline double pa_distance(double epsilon, double beta) {
  return 4.0 * std::pow(epsilon, beta) + 9.0 * epsilon;
}

inline double protocol_failure(double epsilon, double beta) {
  return 2.0 * std::pow(epsilon, 1.0 - 2.0 * beta);
}

inline double clamp_rate(double ell, std::int64_t N) {
  return std::max(ell, 0.0) / static_cast<double>(N);
}

/// Which bound on log2|J_q| ell_ours charges.
enum class JqChoice { Min, HammingBallOnly };

inline RateResult ell_ours(const CountVector& c, const QrngParams& params,
                           JqChoice choice = JqChoice::Min) {
  params.validate();
  if (c.d() != params.d) throw std::invalid_argument("ell_ours: count vector has the wrong length");
  const auto n = params.n();
  RateResult r;
  r.delta = delta_for_epsilon(Strategy::Psi1, n, params.m, params.d, params.epsilon);
  const auto report = log_Jq_bound(c, n, r.delta);
  const double log_jq = choice == JqChoice::Min ? report.log_min : report.log_G;
  const double raw = static_cast<double>(n) * std::log2(static_cast<double>(params.d));
  const double pa = 2.0 * std::log2(1.0 / params.epsilon);
  r.ell = raw - log_jq - pa;
  r.rate = clamp_rate(r.ell, params.N);
  r.eps_PA = pa_distance(params.epsilon, params.beta);
  r.failure_prob = protocol_failure(params.epsilon, params.beta);
  r.breakdown["raw_bits"] = raw;
  if (report.log_F) r.breakdown["log_F"] = *report.log_F;
  r.breakdown["log_G"] = report.log_G;
  r.breakdown["log_Jq"] = log_jq;
  r.breakdown["pa_cost"] = pa;
  return r;
}

/// Splits m into integer counts proportional to c (largest remainder; ties to
/// the lowest index).
inline std::vector<std::int64_t> largest_remainder_counts(const CountVector& c, std::int64_t m) {
  const std::size_t d = static_cast<std::size_t>(c.d());
  std::vector<std::int64_t> counts(d);
  std::vector<double> remainder(d);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const double exact = c[i] * static_cast<double>(m);
    counts[i] = static_cast<std::int64_t>(std::floor(exact));
    remainder[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t k = 0; assigned < m; ++k, ++assigned) ++counts[order[k % d]];
  return counts;
}

/// ell_1 = n (log2 d - 2 log2[Gamma(m+d)/Gamma(m+d+1/2) sum_i Gamma(c_i+3/2)/Gamma(c_i+1)])
/// from the absolute test-round counts c_i (summing to m).
inline double ell_vallone(std::span<const std::int64_t> counts, std::int64_t n, std::int64_t m,
                          int d) {
  if (static_cast<int>(counts.size()) != d) throw std::invalid_argument("ell_vallone: need d counts");
  std::int64_t sum = 0;
  for (auto k : counts) {
    if (k < 0) throw std::invalid_argument("ell_vallone: negative count");
    sum += k;
  }
  if (sum != m) throw std::invalid_argument("ell_vallone: counts must sum to m");
  double ratio_sum = 0.0;
  for (auto k : counts) ratio_sum += std::exp(log_gamma_ratio(static_cast<double>(k), 1.5, 1.0));
  const double ln_bracket =
      log_gamma_ratio(static_cast<double>(m), static_cast<double>(d), d + 0.5) + std::log(ratio_sum);
  return static_cast<double>(n) *
         (std::log2(static_cast<double>(d)) - 2.0 * ln_bracket / std::numbers::ln2);
}

/// log2 of gamma(x) = (x + sqrt(1+x^2)) (x / (sqrt(1+x^2) - 1))^x, with gamma(0) = 1.
inline double log2_gamma_fct(double x) {
  if (!(x >= 0.0)) throw std::domain_error("gamma_fct: argument must be >= 0");
  if (x == 0.0) return 0.0;
  const double s = std::hypot(1.0, x);
  // x / (s - 1) = (s + 1) / x avoids cancellation for small x.
  return std::log2(x + s) + x * std::log2((s + 1.0) / x);
}

inline double gamma_fct(double x) { return std::exp2(log2_gamma_fct(x)); }

inline double xu_delta_prime(std::int64_t N, std::int64_t n, std::int64_t m, int d, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::domain_error("xu_delta_prime: epsilon outside (0,1)");
  const double Nd = static_cast<double>(N);
  const double nd = static_cast<double>(n);
  return d * std::sqrt(Nd * Nd / (nd * nd * static_cast<double>(m)) * std::log(4.0 / epsilon));
}

/// ell_2 = n (log2 d - log2 gamma(d0 + delta')), gamma charged per extracted symbol.
inline double ell_xu(double d0, std::int64_t N, std::int64_t n, std::int64_t m, int d,
                     double epsilon = 1e-12) {
  if (!(d0 >= 0.0)) throw std::invalid_argument("ell_xu: d0 must be >= 0");
  const double delta_prime = xu_delta_prime(N, n, m, d, epsilon);
  return static_cast<double>(n) *
         (std::log2(static_cast<double>(d)) - log2_gamma_fct(d0 + delta_prime));
}

enum class StatisticsMode { Expectation, MonteCarlo };

struct QrngSweepSettings {
  int d = 4;
  double test_fraction = 0.07;
  std::optional<std::int64_t> m_absolute;
  double epsilon = 1e-36;
  double beta = 1.0 / 3.0;
  double epsilon_l2 = 1e-12;
  std::optional<double> d0;  // overrides the channel-derived value
  D0Model d0_model = D0Model::Shift;
  StatisticsMode mode = StatisticsMode::Expectation;
  std::uint64_t seed = 0;
};

struct QrngRow {
  std::int64_t N = 0;
  std::int64_t n = 0;
  std::int64_t m = 0;
  double delta = 0.0;
  double delta_prime = 0.0;
  double d0 = 0.0;
  double ell_ours = 0.0;
  double ell_l1 = 0.0;
  double ell_l2 = 0.0;
  double rate_ours = 0.0;
  double rate_l1 = 0.0;
  double rate_l2 = 0.0;
};

inline QrngRow qrng_row(const ChannelModel& channel, std::int64_t N, const QrngSweepSettings& s,
                        std::uint64_t row_index = 0) {
  QrngParams params{N, s.m_absolute ? *s.m_absolute : test_size(N, s.test_fraction), s.d,
                    s.epsilon, s.beta};
  params.validate();
  QrngRow row;
  row.N = N;
  row.n = params.n();
  row.m = params.m;

  std::vector<std::int64_t> absolute;
  std::optional<CountVector> observed;
  if (s.mode == StatisticsMode::MonteCarlo) {
    observed = sample_counts(channel, params.m, s.d, s.seed, row_index);
    absolute = observed->absolute_counts();
  } else {
    observed = expected_counts_qrng(channel, s.d);
    absolute = largest_remainder_counts(*observed, params.m);
  }

  const auto ours = ell_ours(*observed, params);
  row.delta = ours.delta;
  row.ell_ours = ours.ell;
  row.ell_l1 = ell_vallone(absolute, row.n, row.m, s.d);
  row.d0 = s.d0 ? *s.d0 : d0_for_channel(channel, s.d, s.d0_model);
  row.delta_prime = xu_delta_prime(N, row.n, row.m, s.d, s.epsilon_l2);
  row.ell_l2 = ell_xu(row.d0, N, row.n, row.m, s.d, s.epsilon_l2);
  row.rate_ours = clamp_rate(row.ell_ours, N);
  row.rate_l1 = clamp_rate(row.ell_l1, N);
  row.rate_l2 = clamp_rate(row.ell_l2, N);
  return row;
}

inline std::vector<QrngRow> sweep_qrng(const ChannelModel& channel,
                                       std::span<const std::int64_t> N_values,
                                       const QrngSweepSettings& settings) {
  if (!std::is_sorted(N_values.begin(), N_values.end())) {
    throw std::invalid_argument("sweep_qrng: N values must be ascending");
  }
  validate_channel(channel, settings.d);
  std::vector<QrngRow> rows;
  rows.reserve(N_values.size());
  for (std::size_t i = 0; i < N_values.size(); ++i) {
    rows.push_back(qrng_row(channel, N_values[i], settings, i));
  }
  return rows;
}

}  // namespace fkl
