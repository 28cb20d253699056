#pragma once

// Channel models producing the observation statistics fed to the rate
// formulas: expected test-round counts for the QRNG, the error rate and vacuum
// fraction for HD-BB84, and the mean symbol difference d0 used by the
// continuous-variable style bound.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "fkl/jq.hpp"
#include "fkl/random.hpp"

namespace fkl {

struct Depolarizing {
  double Q = 0.0;
};

struct ExplicitCounts {
  CountVector counts;
};

/// Depolarizing errors plus independent erasure to the vacuum with probability p_vac.
struct LossyDepolarizing {
  double Q = 0.0;
  double p_vac = 0.0;
};

using ChannelModel = std::variant<Depolarizing, ExplicitCounts, LossyDepolarizing>;

inline void check_error_rate(double Q, int d) {
  if (d < 2) throw std::invalid_argument("channel: alphabet size must be >= 2");
  const double ceiling = static_cast<double>(d - 1) / d;
  if (!(Q >= 0.0 && Q <= ceiling + 1e-12)) {
    throw std::invalid_argument("channel: Q = " + std::to_string(Q) + " outside [0, (d-1)/d]");
  }
}

inline void validate_channel(const ChannelModel& channel, int d) {
  std::visit(
      [d](const auto& ch) {
        using T = std::decay_t<decltype(ch)>;
        if constexpr (std::is_same_v<T, ExplicitCounts>) {
          if (ch.counts.d() != d) throw std::invalid_argument("channel: counts have the wrong length");
        } else {
          check_error_rate(ch.Q, d);
          if constexpr (std::is_same_v<T, LossyDepolarizing>) {
            if (!(ch.p_vac >= 0.0 && ch.p_vac <= 1.0)) {
              throw std::invalid_argument("channel: p_vac outside [0,1]");
            }
          }
        }
      },
      channel);
}

/// Expected relative counts of the QRNG test rounds: the ideal symbol 0
/// survives with probability 1-Q, otherwise the outcome is uniform over the rest.
inline CountVector expected_counts_qrng(const ChannelModel& channel, int d) {
  validate_channel(channel, d);
  if (const auto* explicit_counts = std::get_if<ExplicitCounts>(&channel)) {
    return explicit_counts->counts;
  }
  const double Q = std::holds_alternative<Depolarizing>(channel)
                       ? std::get<Depolarizing>(channel).Q
                       : std::get<LossyDepolarizing>(channel).Q;
  std::vector<double> c(static_cast<std::size_t>(d), Q / (d - 1));
  c[0] = 1.0 - Q;
  return CountVector(std::move(c));
}

/// Relative Hamming distance between the parties' raw strings (on non-vacuum rounds).
inline double expected_hamming_distance_qkd(const ChannelModel& channel) {
  if (const auto* dep = std::get_if<Depolarizing>(&channel)) return dep->Q;
  if (const auto* lossy = std::get_if<LossyDepolarizing>(&channel)) return lossy->Q;
  throw std::invalid_argument("expected_hamming_distance_qkd: explicit counts carry no error rate");
}

inline double vacuum_fraction(const ChannelModel& channel) {
  if (const auto* lossy = std::get_if<LossyDepolarizing>(&channel)) return lossy->p_vac;
  return 0.0;
}

/// Multinomial draw of m test-round outcomes, reproducible from (seed, stream).
inline CountVector sample_counts(const ChannelModel& channel, std::int64_t m, int d,
                                 std::uint64_t seed, std::uint64_t stream = 0) {
  if (m < 1) throw std::invalid_argument("sample_counts: m must be >= 1");
  const auto expected = expected_counts_qrng(channel, d);
  auto engine = stream_engine(seed, stream);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(d), 0);
  std::int64_t remaining = m;
  double mass_left = 1.0;
  for (int i = 0; i + 1 < d && remaining > 0; ++i) {
    const double share = expected[static_cast<std::size_t>(i)];
    const double p = mass_left > 0.0 ? std::clamp(share / mass_left, 0.0, 1.0) : 0.0;
    std::binomial_distribution<std::int64_t> draw(remaining, p);
    counts[static_cast<std::size_t>(i)] = draw(engine);
    remaining -= counts[static_cast<std::size_t>(i)];
    mass_left -= share;
  }
  counts[static_cast<std::size_t>(d - 1)] += remaining;
  return CountVector::from_counts(counts);
}

/// Mean |a - b| between the two parties' symbols when a mismatch (probability
/// Q) is uniform over ordered pairs a != b: Q (d+1)/3.
inline double d0_from_depolarizing(double Q, int d) {
  check_error_rate(Q, d);
  return Q * (d + 1) / 3.0;
}

/// Mean |i - a| under the counts c, where a is the most frequent symbol: the
/// reference outcome is shifted to symbol i with probability c_i.
inline double d0_from_counts(const CountVector& c) {
  const int a = c.argmax();
  double d0 = 0.0;
  for (int i = 0; i < c.d(); ++i) d0 += c[static_cast<std::size_t>(i)] * std::abs(i - a);
  return d0;
}

/// How explicit-count channels are mapped to d0. Depolarizing channels always
/// use d0_from_depolarizing.
enum class D0Model { Shift, UniformMismatch };

inline constexpr std::string_view to_string(D0Model model) {
  return model == D0Model::Shift ? "shift" : "uniform-mismatch";
}

inline D0Model parse_d0_model(std::string_view name) {
  if (name == "shift") return D0Model::Shift;
  if (name == "uniform-mismatch") return D0Model::UniformMismatch;
  throw std::invalid_argument("unknown d0 model '" + std::string(name) + "'");
}

inline double d0_for_channel(const ChannelModel& channel, int d, D0Model model = D0Model::Shift) {
  validate_channel(channel, d);
  if (const auto* explicit_counts = std::get_if<ExplicitCounts>(&channel)) {
    const auto& c = explicit_counts->counts;
    if (model == D0Model::Shift) return d0_from_counts(c);
    return d0_from_depolarizing(1.0 - c[static_cast<std::size_t>(c.argmax())], d);
  }
  return d0_from_depolarizing(expected_hamming_distance_qkd(channel), d);
}

}  // namespace fkl
