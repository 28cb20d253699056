#pragma once

// Classical sampling strategies and their failure probabilities.
//
// Each strategy picks a uniformly random subset t of exactly m positions out
// of N = n + m, observes the word on t, and guesses a statistic of the
// unobserved remainder:
//
//   Psi0       relative Hamming weight (one word)
//   Psi1       every relative character count (one word)
//   Psi2       relative Hamming distance of a word pair
//   Psi2plus0  Hamming distance of the pair and the count of one fixed
//              symbol b* in the first word
//
// The strategy fails on a subset when some guessed coordinate is off by more
// than delta. Three routes to that probability live here: the closed-form
// upper bounds, exact evaluation (complete subset enumeration or the
// multivariate hypergeometric reduction), and a seeded Monte Carlo estimate.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fkl/entropy.hpp"
#include "fkl/random.hpp"

namespace fkl {

enum class Strategy { Psi0, Psi1, Psi2, Psi2plus0 };

inline constexpr std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Psi0: return "psi0";
    case Strategy::Psi1: return "psi1";
    case Strategy::Psi2: return "psi2";
    case Strategy::Psi2plus0: return "psi2+0";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::Psi0, Strategy::Psi1, Strategy::Psi2, Strategy::Psi2plus0}) {
    if (name == to_string(s)) return s;
  }
  if (name == "psi2plus0") return Strategy::Psi2plus0;
  throw std::invalid_argument("unknown sampling strategy '" + std::string(name) + "'");
}

inline constexpr bool is_two_party(Strategy s) {
  return s == Strategy::Psi2 || s == Strategy::Psi2plus0;
}

using Word = std::vector<int>;

struct WordPair {
  Word first;
  Word second;
};

/// A sampling scenario: n unobserved positions, m sampled, alphabet size d.
/// `count_index` is the distinguished symbol b* of Psi2plus0.
struct SamplingSpec {
  Strategy strategy = Strategy::Psi0;
  std::int64_t n = 0;
  std::int64_t m = 0;
  int d = 2;
  double delta = 0.1;
  int count_index = 0;

  [[nodiscard]] std::int64_t total() const { return n + m; }

  void validate() const {
    if (m < 1) throw std::invalid_argument("SamplingSpec: sample size m must be >= 1");
    if (m > n) throw std::invalid_argument("SamplingSpec: requires m <= n");
    if (d < 2) throw std::invalid_argument("SamplingSpec: alphabet size d must be >= 2");
    if (!(delta > 0.0)) throw std::invalid_argument("SamplingSpec: delta must be > 0");
    if (count_index < 0 || count_index >= d) {
      throw std::invalid_argument("SamplingSpec: count index outside the alphabet");
    }
  }
};

struct FailureEstimate {
  double analytic_bound = 0.0;  // unclamped
  std::optional<double> empirical;
  std::optional<double> exact;
  std::optional<std::int64_t> trials;
  std::optional<double> std_error;
  std::optional<std::uint64_t> seed;

  [[nodiscard]] double reported_bound() const { return std::min(analytic_bound, 1.0); }
};

namespace detail {

inline double strategy_prefactor(Strategy s, int d) {
  switch (s) {
    case Strategy::Psi0:
    case Strategy::Psi2: return 2.0;
    case Strategy::Psi1: return 2.0 * d;
    case Strategy::Psi2plus0: return 4.0;
  }
  return 0.0;
}

}  // namespace detail

/// Closed-form upper bound on the failure probability. Not clamped to 1.
inline double epsilon_cl(const SamplingSpec& spec) {
  spec.validate();
  const double n = static_cast<double>(spec.n);
  const double m = static_cast<double>(spec.m);
  const double exponent = -spec.delta * spec.delta * m * (n + m) / (m + n + 2.0);
  return detail::strategy_prefactor(spec.strategy, spec.d) * std::exp(exponent);
}

/// The tolerance delta at which epsilon_cl equals epsilon^2.
inline double delta_for_epsilon(Strategy strategy, std::int64_t n, std::int64_t m, int d,
                                double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw std::domain_error("delta_for_epsilon: epsilon must lie in (0,1)");
  }
  SamplingSpec spec{strategy, n, m, d, 1.0, 0};
  spec.validate();
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  const double log_ratio =
      std::log(detail::strategy_prefactor(strategy, d)) - 2.0 * std::log(epsilon);
  double delta = std::sqrt((md + nd + 2.0) * log_ratio / (md * (md + nd)));
  // Rounding can leave epsilon_cl one ulp above epsilon^2.
  const double target = epsilon * epsilon;
  spec.delta = delta;
  while (epsilon_cl(spec) > target) {
    delta = std::nextafter(delta, INFINITY);
    spec.delta = delta;
  }
  return delta;
}

/// Failure test for one sampled subset. Each strategy reduces a position to a
/// small "type"; `captured[t]` counts positions of type t inside the subset
/// and `totals[t]` over the whole word.
class FailurePredicate {
 public:
  explicit FailurePredicate(const SamplingSpec& spec)
      : strategy_(spec.strategy),
        m_(spec.m),
        n_(spec.n),
        threshold_(spec.delta * static_cast<double>(spec.m) * static_cast<double>(spec.n)) {}

  [[nodiscard]] bool operator()(std::span<const std::int64_t> captured,
                                std::span<const std::int64_t> totals) const {
    switch (strategy_) {
      case Strategy::Psi0:
      case Strategy::Psi2: return deviates(captured[1], totals[1]);
      case Strategy::Psi1:
        for (std::size_t i = 0; i < captured.size(); ++i) {
          if (deviates(captured[i], totals[i])) return true;
        }
        return false;
      case Strategy::Psi2plus0:
        return deviates(captured[1] + captured[3], totals[1] + totals[3]) ||
               deviates(captured[2] + captured[3], totals[2] + totals[3]);
    }
    return false;
  }

 private:
  // |k/m - (K-k)/n| > delta, cleared of denominators.
  [[nodiscard]] bool deviates(std::int64_t k, std::int64_t total) const {
    const auto lhs = k * n_ - (total - k) * m_;
    return static_cast<double>(lhs < 0 ? -lhs : lhs) > threshold_;
  }

  Strategy strategy_;
  std::int64_t m_;
  std::int64_t n_;
  double threshold_;
};

/// Number of position types each strategy distinguishes.
inline int type_count(const SamplingSpec& spec) {
  switch (spec.strategy) {
    case Strategy::Psi0:
    case Strategy::Psi2: return 2;
    case Strategy::Psi1: return spec.d;
    case Strategy::Psi2plus0: return 4;
  }
  return 0;
}

namespace detail {

inline void check_symbols(const Word& w, int d) {
  for (int s : w) {
    if (s < 0 || s >= d) throw std::invalid_argument("word symbol outside the alphabet");
  }
}

inline std::vector<int> position_types(const Word& q, const SamplingSpec& spec) {
  if (is_two_party(spec.strategy)) {
    throw std::invalid_argument(std::string(to_string(spec.strategy)) + " needs a word pair");
  }
  if (static_cast<std::int64_t>(q.size()) != spec.total()) {
    throw std::invalid_argument("word length " + std::to_string(q.size()) + " != n + m");
  }
  check_symbols(q, spec.d);
  std::vector<int> types(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    types[i] = spec.strategy == Strategy::Psi0 ? (q[i] != 0 ? 1 : 0) : q[i];
  }
  return types;
}

inline std::vector<int> position_types(const WordPair& q, const SamplingSpec& spec) {
  if (!is_two_party(spec.strategy)) {
    throw std::invalid_argument(std::string(to_string(spec.strategy)) + " needs a single word");
  }
  if (static_cast<std::int64_t>(q.first.size()) != spec.total() ||
      q.second.size() != q.first.size()) {
    throw std::invalid_argument("word pair lengths must both equal n + m");
  }
  check_symbols(q.first, spec.d);
  check_symbols(q.second, spec.d);
  std::vector<int> types(q.first.size());
  for (std::size_t i = 0; i < types.size(); ++i) {
    const int differs = q.first[i] != q.second[i] ? 1 : 0;
    if (spec.strategy == Strategy::Psi2) {
      types[i] = differs;
    } else {
      const int is_count_symbol = q.first[i] == spec.count_index ? 1 : 0;
      types[i] = 2 * is_count_symbol + differs;
    }
  }
  return types;
}

inline std::vector<std::int64_t> type_totals(const std::vector<int>& types, int num_types) {
  std::vector<std::int64_t> totals(static_cast<std::size_t>(num_types), 0);
  for (int t : types) ++totals[static_cast<std::size_t>(t)];
  return totals;
}

inline constexpr std::int64_t kEnumerationLimit = 24;

inline double exact_by_enumeration(const std::vector<int>& types, int num_types,
                                   const SamplingSpec& spec) {
  const auto total = static_cast<std::int64_t>(types.size());
  if (total > kEnumerationLimit) {
    throw std::length_error("exact enumeration limited to n + m <= 24");
  }
  const FailurePredicate fails(spec);
  const auto totals = type_totals(types, num_types);
  std::vector<std::uint32_t> masks(static_cast<std::size_t>(num_types), 0u);
  for (std::size_t i = 0; i < types.size(); ++i) masks[static_cast<std::size_t>(types[i])] |= 1u << i;

  std::vector<std::int64_t> captured(static_cast<std::size_t>(num_types));
  std::uint64_t failures = 0;
  std::uint64_t subsets = 0;
  const std::uint32_t limit = 1u << total;
  // Gosper's hack: every m-bit subset of `total` positions in increasing order.
  for (std::uint32_t s = (1u << spec.m) - 1u; s < limit;) {
    for (std::size_t t = 0; t < masks.size(); ++t) captured[t] = std::popcount(s & masks[t]);
    failures += fails(captured, totals) ? 1 : 0;
    ++subsets;
    const std::uint32_t c = s & (~s + 1u);
    const std::uint32_t r = s + c;
    if (r == 0) break;
    s = (((r ^ s) >> 2) / c) | r;
  }
  return static_cast<double>(failures) / static_cast<double>(subsets);
}

inline double log_binomial(std::int64_t n, std::int64_t k) {
  return log_gamma(static_cast<double>(n) + 1.0) - log_gamma(static_cast<double>(k) + 1.0) -
         log_gamma(static_cast<double>(n - k) + 1.0);
}

// Sums the multivariate hypergeometric mass of every captured-count vector on
// which the predicate fails.
inline double exact_by_hypergeometric(std::span<const std::int64_t> totals,
                                      const SamplingSpec& spec) {
  const FailurePredicate fails(spec);
  const std::int64_t total = std::accumulate(totals.begin(), totals.end(), std::int64_t{0});
  const double log_norm = log_binomial(total, spec.m);
  const std::size_t types = totals.size();
  std::vector<std::int64_t> captured(types, 0);
  std::vector<std::int64_t> suffix(types + 1, 0);
  for (std::size_t t = types; t-- > 0;) suffix[t] = suffix[t + 1] + totals[t];

  double probability = 0.0;
  std::function<void(std::size_t, std::int64_t, double)> visit =
      [&](std::size_t t, std::int64_t remaining, double log_weight) {
        if (t + 1 == types) {
          if (remaining > totals[t]) return;
          captured[t] = remaining;
          if (fails(captured, totals)) {
            probability += std::exp(log_weight + log_binomial(totals[t], remaining) - log_norm);
          }
          return;
        }
        const std::int64_t lo = std::max<std::int64_t>(0, remaining - suffix[t + 1]);
        const std::int64_t hi = std::min(remaining, totals[t]);
        for (std::int64_t k = lo; k <= hi; ++k) {
          captured[t] = k;
          visit(t + 1, remaining - k, log_weight + log_binomial(totals[t], k));
        }
      };
  visit(0, spec.m, 0.0);
  return std::min(probability, 1.0);
}

inline FailureEstimate monte_carlo(const std::vector<int>& types, int num_types,
                                   const SamplingSpec& spec, std::int64_t trials,
                                   std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("Monte Carlo needs at least one trial");
  constexpr std::int64_t kBlock = 4096;
  const FailurePredicate fails(spec);
  const auto totals = type_totals(types, num_types);
  const auto total = static_cast<std::int64_t>(types.size());
  std::vector<std::int64_t> positions(static_cast<std::size_t>(total));
  std::vector<std::int64_t> captured(static_cast<std::size_t>(num_types));
  std::int64_t failures = 0;

  for (std::int64_t block = 0; block * kBlock < trials; ++block) {
    auto engine = stream_engine(seed, static_cast<std::uint64_t>(block));
    std::iota(positions.begin(), positions.end(), std::int64_t{0});
    const std::int64_t end = std::min(trials, (block + 1) * kBlock);
    for (std::int64_t trial = block * kBlock; trial < end; ++trial) {
      std::fill(captured.begin(), captured.end(), 0);
      // Partial Fisher-Yates: the first m entries become a uniform m-subset.
      for (std::int64_t i = 0; i < spec.m; ++i) {
        std::uniform_int_distribution<std::int64_t> pick(i, total - 1);
        std::swap(positions[static_cast<std::size_t>(i)],
                  positions[static_cast<std::size_t>(pick(engine))]);
        ++captured[static_cast<std::size_t>(types[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])])];
      }
      failures += fails(captured, totals) ? 1 : 0;
    }
  }
  FailureEstimate estimate;
  estimate.analytic_bound = epsilon_cl(spec);
  const double p = static_cast<double>(failures) / static_cast<double>(trials);
  estimate.empirical = p;
  estimate.trials = trials;
  estimate.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  estimate.seed = seed;
  return estimate;
}

}  // namespace detail

enum class ExactMethod { Auto, Enumerate, Hypergeometric };

/// Exact probability over uniform m-subsets that the strategy fails on q.
/// Auto enumerates every subset when n + m <= 24 and otherwise uses the
/// hypergeometric reduction over position types.
inline double exact_failure_probability(const Word& q, const SamplingSpec& spec,
                                        ExactMethod method = ExactMethod::Auto) {
  spec.validate();
  const auto types = detail::position_types(q, spec);
  const int t = type_count(spec);
  if (method == ExactMethod::Enumerate ||
      (method == ExactMethod::Auto && spec.total() <= detail::kEnumerationLimit)) {
    return detail::exact_by_enumeration(types, t, spec);
  }
  return detail::exact_by_hypergeometric(detail::type_totals(types, t), spec);
}

inline double exact_failure_probability(const WordPair& q, const SamplingSpec& spec,
                                        ExactMethod method = ExactMethod::Auto) {
  spec.validate();
  const auto types = detail::position_types(q, spec);
  if (method == ExactMethod::Enumerate ||
      (method == ExactMethod::Auto && spec.total() <= detail::kEnumerationLimit)) {
    return detail::exact_by_enumeration(types, 4, spec);
  }
  return detail::exact_by_hypergeometric(detail::type_totals(types, type_count(spec)), spec);
}

/// Exact failure probability of any word whose position-type totals are
/// `class_totals` (see type_count for the number of types per strategy).
inline double exact_failure_probability_for_class(std::span<const std::int64_t> class_totals,
                                                  const SamplingSpec& spec) {
  spec.validate();
  if (static_cast<int>(class_totals.size()) != type_count(spec)) {
    throw std::invalid_argument("class totals do not match the strategy's type count");
  }
  if (std::accumulate(class_totals.begin(), class_totals.end(), std::int64_t{0}) != spec.total()) {
    throw std::invalid_argument("class totals must sum to n + m");
  }
  return detail::exact_by_hypergeometric(class_totals, spec);
}

/// Seeded Monte Carlo estimate; identical inputs give identical output.
inline FailureEstimate empirical_failure_probability(const Word& q, const SamplingSpec& spec,
                                                     std::int64_t trials, std::uint64_t seed) {
  spec.validate();
  return detail::monte_carlo(detail::position_types(q, spec), type_count(spec), spec, trials, seed);
}

inline FailureEstimate empirical_failure_probability(const WordPair& q, const SamplingSpec& spec,
                                                     std::int64_t trials, std::uint64_t seed) {
  spec.validate();
  return detail::monte_carlo(detail::position_types(q, spec), type_count(spec), spec, trials, seed);
}

/// Builds a word (Psi0, Psi1) or word pair (Psi2, Psi2plus0) realising the
/// given position-type totals.
struct ClassRepresentative {
  Word first;
  Word second;  // empty for one-party strategies
};

inline ClassRepresentative representative_for_class(std::span<const std::int64_t> totals,
                                                    const SamplingSpec& spec) {
  ClassRepresentative rep;
  auto append = [](Word& w, std::int64_t count, int symbol) { w.insert(w.end(), static_cast<std::size_t>(count), symbol); };
  switch (spec.strategy) {
    case Strategy::Psi0:
      append(rep.first, totals[1], 1);
      append(rep.first, totals[0], 0);
      break;
    case Strategy::Psi1:
      for (std::size_t s = 0; s < totals.size(); ++s) append(rep.first, totals[s], static_cast<int>(s));
      break;
    case Strategy::Psi2:
      append(rep.first, totals[1], 1);
      append(rep.first, totals[0], 0);
      append(rep.second, spec.total(), 0);
      break;
    case Strategy::Psi2plus0: {
      const int b = spec.count_index;
      const int other = (b + 1) % spec.d;
      // type = 2 * [first == b*] + [first != second]
      const int first_symbol[4] = {other, other, b, b};
      const int second_symbol[4] = {other, b, b, other};
      for (int t = 0; t < 4; ++t) {
        append(rep.first, totals[static_cast<std::size_t>(t)], first_symbol[t]);
        append(rep.second, totals[static_cast<std::size_t>(t)], second_symbol[t]);
      }
      break;
    }
  }
  return rep;
}

/// Calls `visit(totals)` for every composition of `total` into `parts`
/// non-negative integers, in lexicographic order.
inline void for_each_composition(std::int64_t total, int parts,
                                 const std::function<void(std::span<const std::int64_t>)>& visit) {
  std::vector<std::int64_t> current(static_cast<std::size_t>(parts), 0);
  std::function<void(int, std::int64_t)> rec = [&](int index, std::int64_t remaining) {
    if (index + 1 == parts) {
      current[static_cast<std::size_t>(index)] = remaining;
      visit(current);
      return;
    }
    for (std::int64_t k = 0; k <= remaining; ++k) {
      current[static_cast<std::size_t>(index)] = k;
      rec(index + 1, remaining - k);
    }
  };
  rec(0, total);
}

struct WorstCase {
  double exact = 0.0;
  std::vector<std::int64_t> class_totals;
  ClassRepresentative representative;
  std::int64_t classes_examined = 0;
};

/// Maximum exact failure probability over every count-equivalence class of
/// words (or word pairs) of length n + m. Failure depends on q only through
/// its position-type totals, so this equals the max over all d^(n+m) inputs.
inline WorstCase worst_case_failure(const SamplingSpec& spec) {
  spec.validate();
  if (spec.total() > 40) throw std::length_error("worst-case search limited to n + m <= 40");
  WorstCase worst;
  worst.exact = -1.0;
  for_each_composition(spec.total(), type_count(spec), [&](std::span<const std::int64_t> totals) {
    ++worst.classes_examined;
    const double p = detail::exact_by_hypergeometric(totals, spec);
    if (p > worst.exact) {
      worst.exact = p;
      worst.class_totals.assign(totals.begin(), totals.end());
    }
  });
  worst.representative = representative_for_class(worst.class_totals, spec);
  return worst;
}

}  // namespace fkl
