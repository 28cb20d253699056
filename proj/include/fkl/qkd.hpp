#pragma once

// Finite-key rates of high-dimensional BB84 with two mutually unbiased bases,
// optionally extended by a shared vacuum element that models channel loss.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "fkl/channels.hpp"
#include "fkl/entropy.hpp"
#include "fkl/qrng.hpp"
#include "fkl/sampling.hpp"

namespace fkl {

/// Overlap exponents of the two measurements: gamma_hat = -log2 of the largest
/// squared overlap, gamma = -log2 of the second largest.
struct OverlapSpec {
  double gamma_hat = 0.0;
  double gamma = 0.0;
  int b_star = 0;
  int dim = 2;
};

inline OverlapSpec overlaps_for_protocol(int d, bool vacuum) {
  if (d < 2) throw std::invalid_argument("overlaps_for_protocol: d must be >= 2");
  const double log_d = std::log2(static_cast<double>(d));
  if (vacuum) return OverlapSpec{0.0, log_d, d, d + 1};
  return OverlapSpec{log_d, log_d, 0, d};
}

/// Min-entropy lower bound
///   n (c + delta) gamma_hat + n (1 - c - delta) gamma - n Hbar_dim(Delta + delta) log2 dim
/// at an explicit sampling tolerance delta.
inline double three_party_bound_at(double delta_H, double c_bstar, std::int64_t n, double delta,
                                   const OverlapSpec& overlaps) {
  if (!(delta_H >= 0.0 && delta_H <= 1.0)) throw std::invalid_argument("three_party_bound: Delta_H outside [0,1]");
  if (!(c_bstar >= 0.0 && c_bstar <= 1.0)) throw std::invalid_argument("three_party_bound: c_b* outside [0,1]");
  if (overlaps.gamma_hat > overlaps.gamma) {
    throw std::invalid_argument("three_party_bound: requires gamma_hat <= gamma");
  }
  const double nd = static_cast<double>(n);
  const double penalty = extended_d_ary_entropy(delta_H + delta, overlaps.dim) *
                         std::log2(static_cast<double>(overlaps.dim));
  return nd * (c_bstar + delta) * overlaps.gamma_hat +
         nd * (1.0 - c_bstar - delta) * overlaps.gamma - nd * penalty;
}

inline double three_party_bound(double delta_H, double c_bstar, std::int64_t n, std::int64_t m,
                                double epsilon, const OverlapSpec& overlaps) {
  const double delta = delta_for_epsilon(Strategy::Psi2plus0, n, m, overlaps.dim, epsilon);
  return three_party_bound_at(delta_H, c_bstar, n, delta, overlaps);
}

/// Error-correction leakage per raw-key symbol: efficiency (Q log2(d-1) + h(Q)).
inline double leak_ec(double Q, int d, double efficiency = 1.2) {
  check_error_rate(Q, d);
  return efficiency * (Q * std::log2(static_cast<double>(d - 1)) + binary_entropy(Q));
}

inline double r_asym(int d, double Q) {
  return std::log2(static_cast<double>(d)) - 2.0 * leak_ec(Q, d, 1.0);
}

struct QkdParams {
  std::int64_t N = 0;
  std::int64_t m = 0;
  int d = 2;
  double epsilon = 1e-36;
  double beta = 1.0 / 3.0;
  bool vacuum = false;
  double p_vac = 0.0;
  double ec_efficiency = 1.2;
  double epsilon_prior = 1e-12;

  [[nodiscard]] std::int64_t n() const { return N - m; }

  void validate() const {
    if (m < 1) throw std::invalid_argument("QkdParams: m must be >= 1");
    if (m > n()) throw std::invalid_argument("QkdParams: requires m <= n = N - m");
    if (d < 2) throw std::invalid_argument("QkdParams: d must be >= 2");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("QkdParams: epsilon outside (0,1)");
    if (!(epsilon_prior > 0.0 && epsilon_prior < 1.0)) {
      throw std::invalid_argument("QkdParams: epsilon_prior outside (0,1)");
    }
    if (!(beta > 0.0 && beta < 0.5)) throw std::invalid_argument("QkdParams: beta outside (0, 1/2)");
    if (!(p_vac >= 0.0 && p_vac <= 1.0)) throw std::invalid_argument("QkdParams: p_vac outside [0,1]");
    if (!vacuum && p_vac != 0.0) throw std::invalid_argument("QkdParams: p_vac must be 0 without vacuum");
    if (!(ec_efficiency >= 1.0)) throw std::invalid_argument("QkdParams: ec_efficiency must be >= 1");
  }
};

/// Key length from the three-party bound. Without vacuum:
///   n (log2 d - Hbar_d(Delta + delta) log2 d) - n leak - 2 log2(1/eps).
/// With vacuum the kept symbols are n (1 - p_vac - delta), the entropy is
/// taken in dimension d+1 and leakage is charged on the kept symbols only.
inline RateResult ell_hdbb84_ours(double delta_H, double p_vac, QkdParams params) {
  params.p_vac = p_vac;
  params.validate();
  const auto n = params.n();
  const double nd = static_cast<double>(n);
  const auto overlaps = overlaps_for_protocol(params.d, params.vacuum);
  RateResult r;
  r.delta = delta_for_epsilon(Strategy::Psi2plus0, n, params.m, params.d, params.epsilon);
  const double leak = leak_ec(delta_H, params.d, params.ec_efficiency);
  const double pa = 2.0 * std::log2(1.0 / params.epsilon);
  double entropy = 0.0;
  double kept = nd;
  if (params.vacuum) {
    kept = nd * (1.0 - p_vac - r.delta);
    const double per_symbol = std::log2(static_cast<double>(params.d)) -
                              extended_d_ary_entropy(delta_H + r.delta, overlaps.dim) *
                                  std::log2(static_cast<double>(overlaps.dim));
    entropy = kept * per_symbol;
  } else {
    entropy = three_party_bound_at(delta_H, 0.0, n, r.delta, overlaps);
  }
  r.ell = entropy - kept * leak - pa;
  r.rate = clamp_rate(r.ell, params.N);
  r.eps_PA = pa_distance(params.epsilon, params.beta);
  r.failure_prob = protocol_failure(params.epsilon, params.beta);
  r.breakdown["entropy_bound"] = entropy;
  r.breakdown["kept_symbols"] = kept;
  r.breakdown["leak_ec"] = kept * leak;
  r.breakdown["pa_cost"] = pa;
  return r;
}

inline double prior_nu(std::int64_t n, std::int64_t m, double epsilon) {
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  return std::sqrt((nd + md) * (md + 1.0) / (md * md * nd) * std::log(2.0 / epsilon));
}

/// Earlier bound n [log2 d - h(Q+nu) - (Q+nu) log2(d-1)], charged the same
/// leakage and a 2 log2(1/eps) privacy-amplification term at its own epsilon.
inline RateResult ell_hdbb84_prior(double Q, const QkdParams& params) {
  params.validate();
  const auto n = params.n();
  const double nd = static_cast<double>(n);
  RateResult r;
  r.delta = prior_nu(n, params.m, params.epsilon_prior);
  const double log_d = std::log2(static_cast<double>(params.d));
  // The d-ary entropy in bits equals h(x) + x log2(d-1); the extended form
  // keeps the expression defined once Q + nu passes 1 - 1/d.
  const double entropy = nd * (log_d - extended_d_ary_entropy(Q + r.delta, params.d) * log_d);
  const double leak = nd * leak_ec(Q, params.d, params.ec_efficiency);
  const double pa = 2.0 * std::log2(1.0 / params.epsilon_prior);
  r.ell = entropy - leak - pa;
  r.rate = clamp_rate(r.ell, params.N);
  r.eps_PA = params.epsilon_prior;
  r.failure_prob = params.epsilon_prior;
  r.breakdown["entropy_bound"] = entropy;
  r.breakdown["leak_ec"] = leak;
  r.breakdown["pa_cost"] = pa;
  return r;
}

struct QkdSweepSettings {
  int d = 4;
  double test_fraction = 0.07;
  std::optional<std::int64_t> m_absolute;
  double epsilon = 1e-36;
  double beta = 1.0 / 3.0;
  double epsilon_prior = 1e-12;
  double ec_efficiency = 1.2;
  double p_vac = 0.0;  // used for the lossy column unless the channel carries its own
};

struct QkdRow {
  std::int64_t N = 0;
  std::int64_t n = 0;
  std::int64_t m = 0;
  double delta = 0.0;
  double nu = 0.0;
  double p_vac = 0.0;
  double ell_ours = 0.0;
  double ell_prior = 0.0;
  double ell_ours_lossy = 0.0;
  double rate_ours = 0.0;
  double rate_prior = 0.0;
  double rate_asym = 0.0;
  double rate_ours_lossy = 0.0;
};

inline QkdRow qkd_row(const ChannelModel& channel, std::int64_t N, const QkdSweepSettings& s) {
  QkdParams params;
  params.N = N;
  params.m = s.m_absolute ? *s.m_absolute : test_size(N, s.test_fraction);
  params.d = s.d;
  params.epsilon = s.epsilon;
  params.beta = s.beta;
  params.epsilon_prior = s.epsilon_prior;
  params.ec_efficiency = s.ec_efficiency;
  params.validate();

  const double Q = expected_hamming_distance_qkd(channel);
  const double p_vac = std::holds_alternative<LossyDepolarizing>(channel) ? vacuum_fraction(channel) : s.p_vac;

  QkdRow row;
  row.N = N;
  row.n = params.n();
  row.m = params.m;
  row.p_vac = p_vac;
  const auto ours = ell_hdbb84_ours(Q, 0.0, params);
  const auto prior = ell_hdbb84_prior(Q, params);
  QkdParams lossy = params;
  lossy.vacuum = true;
  const auto ours_lossy = ell_hdbb84_ours(Q, p_vac, lossy);
  row.delta = ours.delta;
  row.nu = prior.delta;
  row.ell_ours = ours.ell;
  row.ell_prior = prior.ell;
  row.ell_ours_lossy = ours_lossy.ell;
  row.rate_ours = ours.rate;
  row.rate_prior = prior.rate;
  row.rate_asym = std::max(r_asym(s.d, Q), 0.0);
  row.rate_ours_lossy = ours_lossy.rate;
  return row;
}

inline std::vector<QkdRow> sweep_qkd(const ChannelModel& channel,
                                     std::span<const std::int64_t> N_values,
                                     const QkdSweepSettings& settings) {
  if (!std::is_sorted(N_values.begin(), N_values.end())) {
    throw std::invalid_argument("sweep_qkd: N values must be ascending");
  }
  validate_channel(channel, settings.d);
  std::vector<QkdRow> rows;
  rows.reserve(N_values.size());
  for (auto N : N_values) rows.push_back(qkd_row(channel, N, settings));
  return rows;
}

}  // namespace fkl
