#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "fkl/sampling.hpp"

using namespace fkl;

namespace {

constexpr double kPsi0_10_10_03 = 0.88246633551996797;
constexpr double kPsi20_10_10_03 = 1.7649326710399359;
constexpr double kDeltaPsi1_QRNG = 0.0048970190873714548;
constexpr double kDeltaPsi20_1e6 = 0.012929523898006153;
constexpr double kExactHalfHalf = 0.65628179869665938;

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

Word half_half() {
  Word q(20, 0);
  std::fill(q.begin() + 10, q.end(), 1);
  return q;
}

// Failure test written directly on the words, independent of the library's
// type reduction: compare each guessed relative statistic on the sample with
// the same statistic on the rest.
bool brute_fails(const std::vector<char>& in_sample, const Word& a, const Word* b,
                 const SamplingSpec& spec) {
  const double m = static_cast<double>(spec.m), n = static_cast<double>(spec.n);
  auto off = [&](auto statistic) {
    double on = 0, rest = 0;
    for (std::size_t i = 0; i < a.size(); ++i) (in_sample[i] ? on : rest) += statistic(i) ? 1 : 0;
    return std::abs(on / m - rest / n) > spec.delta;
  };
  switch (spec.strategy) {
    case Strategy::Psi0: return off([&](std::size_t i) { return a[i] != 0; });
    case Strategy::Psi1:
      for (int s = 0; s < spec.d; ++s) {
        if (off([&](std::size_t i) { return a[i] == s; })) return true;
      }
      return false;
    case Strategy::Psi2: return off([&](std::size_t i) { return a[i] != (*b)[i]; });
    case Strategy::Psi2plus0:
      return off([&](std::size_t i) { return a[i] != (*b)[i]; }) ||
             off([&](std::size_t i) { return a[i] == spec.count_index; });
  }
  return false;
}

double brute_exact(const Word& a, const Word* b, const SamplingSpec& spec) {
  const auto N = static_cast<std::size_t>(spec.total());
  std::vector<char> in_sample(N, 0);
  std::fill(in_sample.end() - spec.m, in_sample.end(), 1);
  std::uint64_t fails = 0, total = 0;
  do {
    fails += brute_fails(in_sample, a, b, spec) ? 1 : 0;
    ++total;
  } while (std::next_permutation(in_sample.begin(), in_sample.end()));
  return static_cast<double>(fails) / static_cast<double>(total);
}

Word random_word(std::mt19937_64& rng, std::size_t length, int d) {
  // Skewed symbol frequencies make deviations likely.
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double bias = u(rng);
  std::uniform_int_distribution<int> sym(0, d - 1);
  Word w(length);
  for (auto& s : w) s = u(rng) < bias ? 0 : sym(rng);
  return w;
}

}  // namespace

TEST(EpsilonCl, ClosedForms) {
  const SamplingSpec psi0{Strategy::Psi0, 10, 10, 2, 0.3};
  EXPECT_NEAR(epsilon_cl(psi0), kPsi0_10_10_03, 1e-15);
  SamplingSpec psi20 = psi0;
  psi20.strategy = Strategy::Psi2plus0;
  EXPECT_NEAR(epsilon_cl(psi20), kPsi20_10_10_03, 1e-15);
  FailureEstimate e;
  e.analytic_bound = epsilon_cl(psi20);
  EXPECT_EQ(e.reported_bound(), 1.0);
  SamplingSpec psi2 = psi0;
  psi2.strategy = Strategy::Psi2;
  EXPECT_EQ(epsilon_cl(psi2), epsilon_cl(psi0));
}

TEST(EpsilonCl, Psi1OverPsi0IsAlphabetSize) {
  for (int d : {2, 3, 4, 16}) {
    const SamplingSpec a{Strategy::Psi1, 500, 70, d, 0.04};
    const SamplingSpec b{Strategy::Psi0, 500, 70, d, 0.04};
    EXPECT_NEAR(epsilon_cl(a) / epsilon_cl(b), d, 1e-12 * d);
  }
}

TEST(EpsilonCl, MonotoneInDeltaAndSampleSize) {
  for (auto s : {Strategy::Psi0, Strategy::Psi1, Strategy::Psi2, Strategy::Psi2plus0}) {
    double previous = INFINITY;
    for (double delta = 0.01; delta < 1.0; delta += 0.01) {
      const double v = epsilon_cl({s, 100, 100, 4, delta});
      EXPECT_LT(v, previous);
      previous = v;
    }
    previous = INFINITY;
    for (std::int64_t m = 1; m <= 100; ++m) {
      const double v = epsilon_cl({s, 200 - m, m, 4, 0.1});
      EXPECT_LT(v, previous) << m;
      previous = v;
    }
  }
}

TEST(EpsilonCl, RejectsInvalidSpecs) {
  EXPECT_THROW(epsilon_cl({Strategy::Psi0, 5, 10, 2, 0.1}), std::invalid_argument);
  EXPECT_THROW(epsilon_cl({Strategy::Psi0, 10, 0, 2, 0.1}), std::invalid_argument);
  EXPECT_THROW(epsilon_cl({Strategy::Psi0, 10, 10, 1, 0.1}), std::invalid_argument);
  EXPECT_THROW(epsilon_cl({Strategy::Psi0, 10, 10, 2, 0.0}), std::invalid_argument);
  EXPECT_THROW(epsilon_cl({Strategy::Psi2plus0, 10, 10, 2, 0.1, 2}), std::invalid_argument);
  EXPECT_NO_THROW(epsilon_cl({Strategy::Psi0, 10, 10, 2, 1.5}));
}

TEST(DeltaForEpsilon, ReferenceValues) {
  EXPECT_NEAR(delta_for_epsilon(Strategy::Psi1, 93000000, 7000000, 4, 1e-36), kDeltaPsi1_QRNG, 1e-17);
  EXPECT_NEAR(delta_for_epsilon(Strategy::Psi2plus0, 1000000, 1000000, 4, 1e-36), kDeltaPsi20_1e6, 1e-16);
  EXPECT_THROW(delta_for_epsilon(Strategy::Psi0, 10, 10, 2, 0.0), std::domain_error);
  EXPECT_THROW(delta_for_epsilon(Strategy::Psi0, 10, 10, 2, 1.0), std::domain_error);
}

TEST(DeltaForEpsilon, RoundTripNeverExceedsTarget) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::int64_t> size(1, 1000000000);
  std::uniform_real_distribution<double> log_eps(-80.0, -0.01);
  std::uniform_int_distribution<int> dim(2, 64);
  for (int i = 0; i < 2000; ++i) {
    const auto m = size(rng);
    const auto n = m + size(rng);
    const double eps = std::pow(10.0, log_eps(rng));
    const int d = dim(rng);
    for (auto s : {Strategy::Psi0, Strategy::Psi1, Strategy::Psi2, Strategy::Psi2plus0}) {
      const double delta = delta_for_epsilon(s, n, m, d, eps);
      EXPECT_LE(epsilon_cl({s, n, m, d, delta}), eps * eps);
      EXPECT_GE(epsilon_cl({s, n, m, d, delta}), eps * eps * (1 - 1e-12));
    }
  }
}

TEST(ExactFailure, HypergeometricReference) {
  const auto q = half_half();
  const SamplingSpec spec{Strategy::Psi0, 10, 10, 2, 0.05};
  // Fails unless the sample holds exactly five ones.
  const double oracle = 1.0 - binomial(10, 5) * binomial(10, 5) / binomial(20, 10);
  EXPECT_NEAR(oracle, kExactHalfHalf, 1e-15);
  EXPECT_NEAR(exact_failure_probability(q, spec), kExactHalfHalf, 1e-14);
  EXPECT_NEAR(exact_failure_probability(q, spec, ExactMethod::Hypergeometric), kExactHalfHalf, 1e-13);
  EXPECT_NEAR(brute_exact(q, nullptr, spec), kExactHalfHalf, 1e-14);
}

TEST(ExactFailure, TrivialCases) {
  const Word zeros(20, 0);
  for (auto s : {Strategy::Psi0, Strategy::Psi1}) {
    EXPECT_EQ(exact_failure_probability(zeros, {s, 10, 10, 3, 0.05}), 0.0);
  }
  EXPECT_EQ(exact_failure_probability(WordPair{zeros, zeros}, {Strategy::Psi2, 10, 10, 3, 0.05}), 0.0);
  EXPECT_EQ(exact_failure_probability(half_half(), {Strategy::Psi0, 10, 10, 2, 1.0}), 0.0);
  EXPECT_EQ(exact_failure_probability(half_half(), {Strategy::Psi0, 10, 10, 2, 2.0}), 0.0);
}

TEST(ExactFailure, InputValidation) {
  const SamplingSpec spec{Strategy::Psi0, 10, 10, 2, 0.1};
  EXPECT_THROW(exact_failure_probability(Word(19, 0), spec), std::invalid_argument);
  EXPECT_THROW(exact_failure_probability(Word(20, 2), spec), std::invalid_argument);
  EXPECT_THROW(exact_failure_probability(WordPair{Word(20, 0), Word(20, 0)}, spec),
               std::invalid_argument);
  EXPECT_THROW(exact_failure_probability(Word(20, 0), {Strategy::Psi2, 10, 10, 2, 0.1}),
               std::invalid_argument);
  EXPECT_THROW(exact_failure_probability(Word(30, 0), {Strategy::Psi0, 15, 15, 2, 0.1},
                                         ExactMethod::Enumerate),
               std::length_error);
  // Above the enumeration limit the hypergeometric route takes over.
  EXPECT_EQ(exact_failure_probability(Word(30, 0), {Strategy::Psi0, 15, 15, 2, 0.1}), 0.0);
}

TEST(ExactFailure, EnumerationHypergeometricAndBruteForceAgree) {
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> half(1, 8);
  std::uniform_int_distribution<int> dim(2, 4);
  std::uniform_real_distribution<double> tol(0.02, 0.6);
  for (int trial = 0; trial < 150; ++trial) {
    const int m = half(rng);
    const int n = m + half(rng) - 1;
    const int d = dim(rng);
    const auto strategy = static_cast<Strategy>(trial % 4);
    SamplingSpec spec{strategy, n, m, d, tol(rng), trial % d};
    const auto a = random_word(rng, static_cast<std::size_t>(n + m), d);
    const auto b = random_word(rng, static_cast<std::size_t>(n + m), d);
    double enumerated = 0, hyper = 0, brute = 0;
    if (is_two_party(strategy)) {
      enumerated = exact_failure_probability(WordPair{a, b}, spec, ExactMethod::Enumerate);
      hyper = exact_failure_probability(WordPair{a, b}, spec, ExactMethod::Hypergeometric);
      brute = brute_exact(a, &b, spec);
    } else {
      enumerated = exact_failure_probability(a, spec, ExactMethod::Enumerate);
      hyper = exact_failure_probability(a, spec, ExactMethod::Hypergeometric);
      brute = brute_exact(a, nullptr, spec);
    }
    EXPECT_NEAR(enumerated, brute, 1e-12) << trial;
    EXPECT_NEAR(hyper, brute, 1e-10) << trial;
  }
}

TEST(ExactFailure, Psi2EqualsPsi0OfDifferenceWord) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 2 + trial % 3;
    const int m = 1 + trial % 10;
    const int n = 20 - m;
    if (m > n) continue;
    const auto a = random_word(rng, 20, d);
    const auto b = random_word(rng, 20, d);
    Word diff(20);
    for (std::size_t i = 0; i < 20; ++i) diff[i] = ((a[i] - b[i]) % d + d) % d;
    const double delta = 0.03 + 0.01 * (trial % 20);
    const double p2 = exact_failure_probability(WordPair{a, b}, {Strategy::Psi2, n, m, d, delta});
    const double p0 = exact_failure_probability(diff, {Strategy::Psi0, n, m, d, delta});
    EXPECT_EQ(p2, p0) << trial;
  }
}

TEST(ExactFailure, AnalyticBoundIsSoundOnRandomInputs) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> half(1, 12);
  std::uniform_real_distribution<double> tol(0.01, 0.8);
  int checked = 0;
  for (int trial = 0; trial < 240; ++trial) {
    const int m = half(rng);
    const int n = std::max(m, 24 - m - static_cast<int>(rng() % 6));
    if (n + m > 24) continue;
    const int d = 2 + trial % 3;
    const auto strategy = static_cast<Strategy>(trial % 4);
    const SamplingSpec spec{strategy, n, m, d, tol(rng), 0};
    const auto a = random_word(rng, static_cast<std::size_t>(n + m), d);
    const auto b = random_word(rng, static_cast<std::size_t>(n + m), d);
    double exact = 0;
    FailureEstimate mc;
    if (is_two_party(strategy)) {
      exact = exact_failure_probability(WordPair{a, b}, spec);
      mc = empirical_failure_probability(WordPair{a, b}, spec, 4000, 100 + trial);
    } else {
      exact = exact_failure_probability(a, spec);
      mc = empirical_failure_probability(a, spec, 4000, 100 + trial);
    }
    EXPECT_GE(epsilon_cl(spec), exact) << trial;
    EXPECT_GE(exact, *mc.empirical - 3.0 * *mc.std_error - 1e-12) << trial;
    ++checked;
  }
  EXPECT_GE(checked, 200);
}

TEST(Empirical, TrivialZeroAndDeterminism) {
  const Word zeros(20, 0);
  const auto e = empirical_failure_probability(zeros, {Strategy::Psi1, 10, 10, 4, 0.01}, 1000, 1);
  EXPECT_EQ(*e.empirical, 0.0);
  EXPECT_EQ(*e.std_error, 0.0);
  EXPECT_EQ(*e.trials, 1000);
  EXPECT_EQ(*e.seed, 1u);
  std::mt19937_64 rng(9);
  const auto q = random_word(rng, 20, 3);
  const auto pair = empirical_failure_probability(WordPair{q, q}, {Strategy::Psi2, 10, 10, 3, 0.01}, 1000, 1);
  EXPECT_EQ(*pair.empirical, 0.0);

  const SamplingSpec spec{Strategy::Psi0, 10, 10, 2, 0.05};
  const auto x = empirical_failure_probability(half_half(), spec, 20000, 99);
  const auto y = empirical_failure_probability(half_half(), spec, 20000, 99);
  const auto z = empirical_failure_probability(half_half(), spec, 20000, 100);
  EXPECT_EQ(*x.empirical, *y.empirical);
  EXPECT_NE(*x.empirical, *z.empirical);
  EXPECT_THROW(empirical_failure_probability(half_half(), spec, 0, 1), std::invalid_argument);
}

TEST(Empirical, HalfHalfWordWithinThreeSigmaOfExact) {
  const SamplingSpec spec{Strategy::Psi0, 10, 10, 2, 0.05};
  const auto e = empirical_failure_probability(half_half(), spec, 100000, 2024);
  EXPECT_NEAR(*e.empirical, kExactHalfHalf, 3.0 * *e.std_error);
  EXPECT_NEAR(*e.std_error, std::sqrt(kExactHalfHalf * (1 - kExactHalfHalf) / 1e5), 1e-4);
}

TEST(WorstCase, MatchesMaximumOverAllWords) {
  for (auto strategy : {Strategy::Psi0, Strategy::Psi1}) {
    const SamplingSpec spec{strategy, 5, 4, 3, 0.15};
    double best = 0;
    Word w(9, 0);
    for (int code = 0; code < 19683; ++code) {  // 3^9 words
      int c = code;
      for (auto& s : w) s = c % 3, c /= 3;
      best = std::max(best, exact_failure_probability(w, spec));
    }
    const auto worst = worst_case_failure(spec);
    EXPECT_NEAR(worst.exact, best, 1e-12);
    EXPECT_NEAR(exact_failure_probability(worst.representative.first, spec), worst.exact, 1e-12);
  }
}

TEST(WorstCase, PairStrategiesAndRepresentatives) {
  for (auto strategy : {Strategy::Psi2, Strategy::Psi2plus0}) {
    const SamplingSpec spec{strategy, 3, 3, 3, 0.2, 1};
    double best = 0;
    Word a(6), b(6);
    for (int code = 0; code < 531441; ++code) {  // 3^12 pairs
      int c = code;
      for (auto& s : a) s = c % 3, c /= 3;
      for (auto& s : b) s = c % 3, c /= 3;
      best = std::max(best, exact_failure_probability(WordPair{a, b}, spec));
    }
    const auto worst = worst_case_failure(spec);
    EXPECT_NEAR(worst.exact, best, 1e-12);
    const WordPair rep{worst.representative.first, worst.representative.second};
    EXPECT_NEAR(exact_failure_probability(rep, spec), worst.exact, 1e-12);
  }
}

TEST(WorstCase, ClassCounts) {
  EXPECT_EQ(worst_case_failure({Strategy::Psi0, 10, 10, 2, 0.1}).classes_examined, 21);
  EXPECT_EQ(worst_case_failure({Strategy::Psi1, 10, 10, 3, 0.1}).classes_examined, 231);
  EXPECT_EQ(worst_case_failure({Strategy::Psi2plus0, 10, 10, 3, 0.1}).classes_examined, 1771);
  EXPECT_THROW(worst_case_failure({Strategy::Psi0, 30, 30, 2, 0.1}), std::length_error);
}

TEST(StrategyNames, RoundTrip) {
  for (auto s : {Strategy::Psi0, Strategy::Psi1, Strategy::Psi2, Strategy::Psi2plus0}) {
    EXPECT_EQ(parse_strategy(to_string(s)), s);
  }
  EXPECT_EQ(parse_strategy("psi2plus0"), Strategy::Psi2plus0);
  EXPECT_THROW(parse_strategy("psi3"), std::invalid_argument);
}
