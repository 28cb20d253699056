#pragma once

// Batch driver behind the finite-key-lab command: resolves a JSON run
// configuration, validates it completely, computes the requested table and
// writes <mode>.csv, <mode>.meta.json and optionally <mode>.svg.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkl/channels.hpp"
#include "fkl/io.hpp"
#include "fkl/jq.hpp"
#include "fkl/qkd.hpp"
#include "fkl/qrng.hpp"
#include "fkl/sampling.hpp"

namespace fkl::app {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

inline const std::vector<std::string>& modes() {
  static const std::vector<std::string> all = {"qrng-sweep",    "qkd-sweep", "jq-bound",
                                               "sample-verify", "mu-demo",   "convergence"};
  return all;
}

/// Raised for any configuration problem; maps to exit status 1.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct RunOptions {
  std::string mode;
  json config = json::object();
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed;
  bool svg = false;
};

struct RunOutcome {
  int exit_code = 0;
  std::string message;
  std::vector<std::filesystem::path> files;
};

namespace detail {

inline double as_number(const json& value, const std::string& key) {
  if (value.is_number()) return value.get<double>();
  if (value.is_string()) {
    const auto& text = value.get_ref<const std::string&>();
    std::size_t used = 0;
    double parsed = 0.0;
    try {
      parsed = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == text.size() && used > 0) return parsed;
  }
  throw ConfigError("'" + key + "' must be a number");
}

inline std::int64_t as_integer(const json& value, const std::string& key) {
  if (value.is_number_integer()) return value.get<std::int64_t>();
  const double x = as_number(value, key);
  if (!(std::abs(x) < 9.2e18) || x != std::floor(x)) {
    throw ConfigError("'" + key + "' must be an integer");
  }
  return static_cast<std::int64_t>(x);
}

class Reader {
 public:
  explicit Reader(const json& config) : config_(config) {
    if (!config_.is_object()) throw ConfigError("configuration must be a JSON object");
  }

  [[nodiscard]] bool has(const std::string& key) const { return config_.contains(key); }

  double number(const std::string& key, double fallback) {
    const double v = has(key) ? as_number(config_.at(key), key) : fallback;
    resolved_[key] = v;
    return v;
  }

  double number(const std::string& key) {
    require(key);
    return number(key, 0.0);
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const auto v = has(key) ? as_integer(config_.at(key), key) : fallback;
    resolved_[key] = v;
    return v;
  }

  std::int64_t integer(const std::string& key) {
    require(key);
    return integer(key, 0);
  }

  bool flag(const std::string& key, bool fallback) {
    bool v = fallback;
    if (has(key)) {
      if (!config_.at(key).is_boolean()) throw ConfigError("'" + key + "' must be true or false");
      v = config_.at(key).get<bool>();
    }
    resolved_[key] = v;
    return v;
  }

  std::string text(const std::string& key, const std::string& fallback) {
    std::string v = fallback;
    if (has(key)) {
      if (!config_.at(key).is_string()) throw ConfigError("'" + key + "' must be a string");
      v = config_.at(key).get<std::string>();
    }
    resolved_[key] = v;
    return v;
  }

  /// A number or a list of numbers.
  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    std::vector<double> v = std::move(fallback);
    if (has(key)) {
      v.clear();
      const auto& node = config_.at(key);
      if (node.is_array()) {
        for (const auto& item : node) v.push_back(as_number(item, key));
      } else {
        v.push_back(as_number(node, key));
      }
    }
    if (v.empty()) throw ConfigError("'" + key + "' must not be empty");
    resolved_[key] = v;
    return v;
  }

  std::vector<std::int64_t> integers(const std::string& key, std::vector<std::int64_t> fallback) {
    std::vector<std::int64_t> v = std::move(fallback);
    if (has(key)) {
      v.clear();
      const auto& node = config_.at(key);
      if (node.is_array()) {
        for (const auto& item : node) v.push_back(as_integer(item, key));
      } else {
        v.push_back(as_integer(node, key));
      }
    }
    if (v.empty()) throw ConfigError("'" + key + "' must not be empty");
    resolved_[key] = v;
    return v;
  }

  const json& raw(const std::string& key) const { return config_.at(key); }
  void record(const std::string& key, json value) { resolved_[key] = std::move(value); }
  [[nodiscard]] const json& resolved() const { return resolved_; }

 private:
  void require(const std::string& key) const {
    if (!has(key)) throw ConfigError("missing required field '" + key + "'");
  }

  const json& config_;
  json resolved_ = json::object();
};

inline ChannelModel read_channel(Reader& reader, int d) {
  if (!reader.has("channel")) throw ConfigError("missing required field 'channel'");
  const json& node = reader.raw("channel");
  if (!node.is_object() || !node.contains("kind") || !node.at("kind").is_string()) {
    throw ConfigError("'channel' must be an object with a string 'kind'");
  }
  const auto kind = node.at("kind").get<std::string>();
  Reader sub(node);
  sub.text("kind", kind);
  ChannelModel channel;
  if (kind == "depolarizing") {
    channel = Depolarizing{sub.number("Q")};
  } else if (kind == "lossy") {
    channel = LossyDepolarizing{sub.number("Q"), sub.number("p_vac")};
  } else if (kind == "explicit") {
    channel = ExplicitCounts{CountVector(sub.numbers("counts", {}))};
  } else {
    throw ConfigError("unknown channel kind '" + kind + "' (depolarizing, explicit, lossy)");
  }
  validate_channel(channel, d);
  reader.record("channel", sub.resolved());
  return channel;
}

// N values from an explicit list or a log-spaced grid {min, max, points_per_decade}.
inline std::vector<std::int64_t> read_N_values(Reader& reader) {
  std::vector<std::int64_t> values;
  if (reader.has("N_values")) {
    values = reader.integers("N_values", {});
  } else if (reader.has("N_grid")) {
    Reader grid(reader.raw("N_grid"));
    const double lo = grid.number("min");
    const double hi = grid.number("max");
    const auto per_decade = grid.integer("points_per_decade", 4);
    if (!(lo >= 1.0 && hi >= lo) || per_decade < 1) throw ConfigError("invalid 'N_grid'");
    const double step = 1.0 / static_cast<double>(per_decade);
    const double span = std::log10(hi) - std::log10(lo);
    const auto count = static_cast<std::int64_t>(std::floor(span / step + 1e-9));
    for (std::int64_t k = 0; k <= count; ++k) {
      const auto N = static_cast<std::int64_t>(std::llround(lo * std::pow(10.0, k * step)));
      if (values.empty() || N > values.back()) values.push_back(N);
    }
    reader.record("N_values", values);
  } else {
    throw ConfigError("missing 'N_values' or 'N_grid'");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] < 2) throw ConfigError("every N must be >= 2");
    if (i && values[i] <= values[i - 1]) throw ConfigError("N values must be strictly ascending");
  }
  return values;
}

// "m" below 1 is a fraction of N, otherwise an absolute test size.
struct TestSize {
  double fraction = 0.07;
  std::optional<std::int64_t> absolute;

  [[nodiscard]] std::int64_t for_N(std::int64_t N) const {
    return absolute ? *absolute : test_size(N, fraction);
  }
};

inline TestSize read_test_size(Reader& reader) {
  TestSize size;
  const double m = reader.number("m", 0.07);
  if (!(m > 0.0)) throw ConfigError("'m' must be positive");
  if (m < 1.0) {
    if (m > 0.5) throw ConfigError("'m' as a fraction of N must be <= 0.5 (m <= n)");
    size.fraction = m;
  } else {
    if (m != std::floor(m)) throw ConfigError("'m' >= 1 must be an integer test size");
    size.absolute = static_cast<std::int64_t>(m);
  }
  return size;
}

inline std::vector<std::string> preamble(const std::string& mode, std::uint64_t seed,
                                         const json& resolved) {
  std::vector<std::string> lines = {"finite-key-lab " + std::string(kVersion),
                                    "mode = " + mode, "seed = " + std::to_string(seed)};
  for (const auto& [key, value] : resolved.items()) lines.push_back(key + " = " + value.dump());
  return lines;
}

struct Computation {
  io::Table table;
  json notes = json::object();
  std::vector<io::Series> series;
  std::string y_label;
};

inline std::vector<io::Series> series_from(const io::Table& table, const std::string& x,
                                           const std::vector<std::string>& ys) {
  std::vector<io::Series> out;
  const auto xi = *table.column_index(x);
  for (const auto& name : ys) {
    io::Series s{name, {}, {}};
    const auto yi = *table.column_index(name);
    for (const auto& row : table.rows) {
      auto value = [](const io::Cell& c) -> double {
        if (const auto* d = std::get_if<double>(&c)) return *d;
        if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
        return NAN;
      };
      s.x.push_back(value(row[xi]));
      s.y.push_back(value(row[yi]));
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------- qrng-sweep

inline Computation qrng_sweep(Reader& r) {
  QrngSweepSettings s;
  s.d = static_cast<int>(r.integer("d", 4));
  const auto channel = read_channel(r, s.d);
  const auto Ns = read_N_values(r);
  const auto size = read_test_size(r);
  s.test_fraction = size.fraction;
  s.m_absolute = size.absolute;
  s.epsilon = r.number("epsilon", 1e-36);
  s.beta = r.number("beta", 1.0 / 3.0);
  s.epsilon_l2 = r.number("epsilon_l2", 1e-12);
  if (r.has("d0")) s.d0 = r.number("d0");
  if (s.d0 && !(*s.d0 >= 0.0)) throw ConfigError("'d0' must be >= 0");
  s.d0_model = parse_d0_model(r.text("d0_model", "shift"));
  const auto mode = r.text("statistics", "expectation");
  if (mode == "monte-carlo") {
    s.mode = StatisticsMode::MonteCarlo;
  } else if (mode != "expectation") {
    throw ConfigError("'statistics' must be 'expectation' or 'monte-carlo'");
  }
  s.seed = static_cast<std::uint64_t>(r.integer("seed", 0));
  if (!(s.epsilon_l2 > 0.0 && s.epsilon_l2 < 1.0)) throw ConfigError("'epsilon_l2' outside (0,1)");
  for (auto N : Ns) QrngParams{N, size.for_N(N), s.d, s.epsilon, s.beta}.validate();

  Computation out;
  out.table.columns = {"N", "n", "m", "delta", "delta_prime", "d0", "ell_ours", "ell_l1", "ell_l2",
                       "rate_ours", "rate_l1", "rate_l2"};
  for (const auto& row : sweep_qrng(channel, Ns, s)) {
    out.table.add_row({row.N, row.n, row.m, row.delta, row.delta_prime, row.d0, row.ell_ours,
                       row.ell_l1, row.ell_l2, row.rate_ours, row.rate_l1, row.rate_l2});
  }
  out.notes["d0_model"] = s.d0 ? "explicit d0" : std::string(to_string(s.d0_model));
  out.notes["l1_counts"] = "largest-remainder rounding of m*c (expectation mode)";
  out.notes["l1_epsilon"] = "none (bound carries no smoothing term)";
  out.notes["eps_PA"] = pa_distance(s.epsilon, s.beta);
  out.notes["failure_prob"] = protocol_failure(s.epsilon, s.beta);
  out.series = series_from(out.table, "N", {"rate_ours", "rate_l1", "rate_l2"});
  out.y_label = "bits per signal";
  return out;
}

// ----------------------------------------------------------------- qkd-sweep

inline Computation qkd_sweep(Reader& r) {
  QkdSweepSettings s;
  s.d = static_cast<int>(r.integer("d", 4));
  const auto channel = read_channel(r, s.d);
  if (std::holds_alternative<ExplicitCounts>(channel)) {
    throw ConfigError("qkd-sweep needs a depolarizing or lossy channel");
  }
  const auto Ns = read_N_values(r);
  const auto size = read_test_size(r);
  s.test_fraction = size.fraction;
  s.m_absolute = size.absolute;
  s.epsilon = r.number("epsilon", 1e-36);
  s.beta = r.number("beta", 1.0 / 3.0);
  s.epsilon_prior = r.number("epsilon_prior", 1e-12);
  s.ec_efficiency = r.number("ec_efficiency", 1.2);
  s.p_vac = r.number("p_vac", 0.0);
  if (!(s.p_vac >= 0.0 && s.p_vac <= 1.0)) throw ConfigError("'p_vac' outside [0,1]");
  for (auto N : Ns) {
    QkdParams p;
    p.N = N;
    p.m = size.for_N(N);
    p.d = s.d;
    p.epsilon = s.epsilon;
    p.beta = s.beta;
    p.epsilon_prior = s.epsilon_prior;
    p.ec_efficiency = s.ec_efficiency;
    p.validate();
  }

  Computation out;
  out.table.columns = {"N", "n", "m", "delta", "nu", "p_vac", "ell_ours", "ell_prior",
                       "ell_ours_lossy", "rate_ours", "rate_prior", "rate_asym", "rate_ours_lossy"};
  for (const auto& row : sweep_qkd(channel, Ns, s)) {
    out.table.add_row({row.N, row.n, row.m, row.delta, row.nu, row.p_vac, row.ell_ours,
                       row.ell_prior, row.ell_ours_lossy, row.rate_ours, row.rate_prior,
                       row.rate_asym, row.rate_ours_lossy});
  }
  out.notes["prior_terms"] = "same leak_EC and a 2 log2(1/epsilon_prior) privacy-amplification cost";
  out.notes["lossy_leak"] = "leak_EC charged on n(1 - p_vac - delta) kept symbols";
  out.notes["eps_PA"] = pa_distance(s.epsilon, s.beta);
  out.notes["failure_prob"] = protocol_failure(s.epsilon, s.beta);
  out.series = series_from(out.table, "N", {"rate_ours", "rate_prior", "rate_asym", "rate_ours_lossy"});
  out.y_label = "key bits per signal";
  return out;
}

// ------------------------------------------------------------------ jq-bound

inline CountVector read_counts(Reader& r, int& d) {
  if (r.has("absolute_counts")) {
    const auto counts = r.integers("absolute_counts", {});
    d = static_cast<int>(counts.size());
    return CountVector::from_counts(counts);
  }
  if (r.has("counts")) {
    auto c = CountVector(r.numbers("counts", {}));
    d = c.d();
    return c;
  }
  d = static_cast<int>(r.integer("d", 4));
  return expected_counts_qrng(read_channel(r, d), d);
}

inline Computation jq_bound(Reader& r) {
  int d = 0;
  const auto c = read_counts(r, d);
  const auto ns = r.integers("n", {});
  const auto deltas = r.numbers("delta", {});
  const bool exact = r.flag("exact", false);
  for (auto n : ns) {
    if (n < 1) throw ConfigError("'n' must be >= 1");
  }
  for (double delta : deltas) {
    if (!(delta > 0.0)) throw ConfigError("'delta' must be > 0");
  }
  std::optional<std::int64_t> m;
  if (r.has("m")) m = r.integer("m");

  Computation out;
  out.table.columns = {"N", "n", "m", "delta", "log_F", "log_G", "log_min", "log_exact",
                       "exact_within_min"};
  for (auto n : ns) {
    for (double delta : deltas) {
      auto report = log_Jq_bound(c, n, delta);
      if (exact) report.log_exact = log_Jq_exact(c, n, delta);
      const auto mm = m.value_or(n);
      io::Cell within = std::monostate{};
      if (report.log_exact) within = *report.log_exact <= report.log_min + 1e-9;
      out.table.add_row({n + mm, n, mm, delta, io::optional_cell(report.log_F), report.log_G,
                         report.log_min, io::optional_cell(report.log_exact), within});
    }
  }
  out.notes["log_F"] = "empty when delta >= 1/d";
  out.notes["G_symbol"] = c.argmax();
  out.series = series_from(out.table, "n", {"log_F", "log_G", "log_min"});
  out.y_label = "log2 |J_q| bound";
  return out;
}

// ------------------------------------------------------------- sample-verify

inline Word read_word(const json& node, const std::string& key) {
  if (!node.is_array()) throw ConfigError("'" + key + "' must be an array of symbols");
  Word w;
  for (const auto& s : node) w.push_back(static_cast<int>(as_integer(s, key)));
  return w;
}

inline Computation sample_verify(Reader& r, std::uint64_t seed) {
  std::vector<Strategy> strategies;
  if (r.has("strategy") && r.raw("strategy").is_array()) {
    json names = json::array();
    for (const auto& s : r.raw("strategy")) {
      if (!s.is_string()) throw ConfigError("'strategy' entries must be strings");
      strategies.push_back(parse_strategy(s.get<std::string>()));
      names.push_back(s);
    }
    r.record("strategy", names);
  } else {
    strategies.push_back(parse_strategy(r.text("strategy", "psi0")));
  }
  SamplingSpec base;
  base.n = r.integer("n");
  base.m = r.integer("m", base.n);
  base.d = static_cast<int>(r.integer("d", 2));
  base.count_index = static_cast<int>(r.integer("count_index", 0));
  const auto deltas = r.numbers("delta", {});
  const auto trials = r.integer("trials", 100000);
  if (trials < 1) throw ConfigError("'trials' must be >= 1");

  std::optional<Word> word;
  std::optional<WordPair> pair;
  if (r.has("word")) {
    word = read_word(r.raw("word"), "word");
    r.record("word", *word);
  }
  if (r.has("word_pair")) {
    const auto& node = r.raw("word_pair");
    if (!node.is_array() || node.size() != 2) throw ConfigError("'word_pair' must hold two words");
    pair = WordPair{read_word(node[0], "word_pair"), read_word(node[1], "word_pair")};
    r.record("word_pair", node);
  }
  for (auto strategy : strategies) {
    for (double delta : deltas) {
      SamplingSpec spec = base;
      spec.strategy = strategy;
      spec.delta = delta;
      spec.validate();
      // Without an explicit input the worst count class is searched.
      const bool explicit_input = is_two_party(strategy) ? pair.has_value() : word.has_value();
      if (!explicit_input && spec.total() > 40) {
        throw ConfigError("worst-case search needs n + m <= 40");
      }
    }
  }

  Computation out;
  out.table.columns = {"N", "n", "m", "delta", "strategy", "d", "input", "analytic_bound",
                       "exact", "empirical", "std_error", "trials", "bound_holds", "within_3sigma"};
  for (auto strategy : strategies) {
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      SamplingSpec spec = base;
      spec.strategy = strategy;
      spec.delta = deltas[k];
      const std::uint64_t stream_seed = seed + 1000003ull * k;
      double exact = 0.0;
      FailureEstimate estimate;
      std::string input;
      if (!is_two_party(strategy) && word) {
        exact = exact_failure_probability(*word, spec);
        estimate = empirical_failure_probability(*word, spec, trials, stream_seed);
        input = "word";
      } else if (is_two_party(strategy) && pair) {
        exact = exact_failure_probability(*pair, spec);
        estimate = empirical_failure_probability(*pair, spec, trials, stream_seed);
        input = "word_pair";
      } else {
        const auto worst = worst_case_failure(spec);
        exact = worst.exact;
        const auto& rep = worst.representative;
        estimate = is_two_party(strategy)
                       ? empirical_failure_probability(WordPair{rep.first, rep.second}, spec, trials, stream_seed)
                       : empirical_failure_probability(rep.first, spec, trials, stream_seed);
        input = "worst-case";
      }
      const double analytic = estimate.analytic_bound;
      const bool close = std::abs(*estimate.empirical - exact) <= 3.0 * *estimate.std_error + 1e-12;
      out.table.add_row({spec.total(), spec.n, spec.m, spec.delta, std::string(to_string(strategy)),
                         std::int64_t{spec.d}, input, analytic, exact, *estimate.empirical,
                         *estimate.std_error, trials, exact <= analytic, close});
    }
  }
  out.notes["analytic_bound"] = "unclamped";
  out.notes["monte_carlo"] = "uniform size-m subsets; block streams derived from the seed";
  return out;
}

// ------------------------------------------------------------------- mu-demo

inline Computation mu_demo(Reader& r, std::uint64_t seed) {
  const auto dims = r.integers("dims", {2, 3, 4, 5, 6, 7, 8});
  const auto states = r.integer("states", 1000);
  if (states < 1) throw ConfigError("'states' must be >= 1");
  for (auto d : dims) {
    if (d < 2 || d > 4096) throw ConfigError("'dims' entries must lie in [2, 4096]");
  }
  Computation out;
  out.table.columns = {"d", "states", "gamma", "min_sum", "margin", "basis_state_sum",
                       "fourier_state_sum"};
  for (auto d : dims) {
    auto engine = stream_engine(seed, static_cast<std::uint64_t>(d));
    double min_sum = INFINITY;
    for (std::int64_t k = 0; k < states; ++k) {
      const auto psi = random_state(static_cast<int>(d), engine);
      const auto s = maassen_uffink_demo(psi);
      min_sum = std::min(min_sum, s.H_Z + s.H_X);
    }
    std::vector<std::complex<double>> basis(static_cast<std::size_t>(d), 0.0);
    basis[0] = 1.0;
    const auto b = maassen_uffink_demo(basis);
    std::vector<std::complex<double>> flat(static_cast<std::size_t>(d),
                                           1.0 / std::sqrt(static_cast<double>(d)));
    const auto f = maassen_uffink_demo(flat);
    out.table.add_row({d, states, b.gamma, min_sum, min_sum - b.gamma, b.H_Z + b.H_X, f.H_Z + f.H_X});
  }
  out.notes["X_basis"] = "discrete Fourier basis";
  out.notes["columns"] = "mu-demo reports per-dimension entropy sums, not N/n/m/delta";
  return out;
}

// --------------------------------------------------------------- convergence

inline Computation convergence(Reader& r) {
  const auto p = ProbabilityDistribution(r.numbers("distribution", {0.25, 0.25, 0.25, 0.25}));
  const auto schedule = r.integers("n_schedule", {10000, 1000000, 100000000});
  const double epsilon = r.number("epsilon", 1e-36);
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("'epsilon' outside (0,1)");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    if (schedule[i] < 1 || (i && schedule[i] < schedule[i - 1])) {
      throw ConfigError("'n_schedule' must be positive and ascending");
    }
  }
  Computation out;
  out.table.columns = {"N", "n", "m", "delta", "F_over_n", "G_over_n", "shannon", "F_gap",
                       "ratio_F_G"};
  for (const auto& row : convergence_report(p, schedule, epsilon)) {
    std::optional<double> gap;
    if (row.F_over_n) gap = std::abs(*row.F_over_n - row.shannon);
    out.table.add_row({2 * row.n, row.n, row.n, row.delta, io::optional_cell(row.F_over_n),
                       row.G_over_n, row.shannon, io::optional_cell(gap),
                       io::optional_cell(row.ratio)});
  }
  out.notes["delta_rule"] = "psi1 inversion with m = n";
  out.series = series_from(out.table, "n", {"F_over_n", "G_over_n", "shannon"});
  out.y_label = "bits per symbol";
  return out;
}

inline Computation compute(const std::string& mode, Reader& reader, std::uint64_t seed) {
  if (mode == "qrng-sweep") return qrng_sweep(reader);
  if (mode == "qkd-sweep") return qkd_sweep(reader);
  if (mode == "jq-bound") return jq_bound(reader);
  if (mode == "sample-verify") return sample_verify(reader, seed);
  if (mode == "mu-demo") return mu_demo(reader, seed);
  if (mode == "convergence") return convergence(reader);
  throw ConfigError("unknown mode '" + mode + "'");
}

}  // namespace detail

/// Loads a JSON configuration file; unreadable files are I/O failures and
/// malformed JSON is a configuration failure.
inline json load_config(const std::filesystem::path& path) {
  const auto text = io::read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline RunOutcome run(const RunOptions& options) {
  RunOutcome outcome;
  try {
    const auto& known = modes();
    if (std::find(known.begin(), known.end(), options.mode) == known.end()) {
      throw ConfigError("unknown mode '" + options.mode + "'");
    }
    if (options.config.contains("mode") && options.config.at("mode") != options.mode) {
      throw ConfigError("config mode does not match the requested mode");
    }
    json config = options.config;
    config.erase("mode");
    const std::uint64_t seed = options.seed ? *options.seed
                                            : config.contains("seed")
                                                  ? static_cast<std::uint64_t>(detail::as_integer(config.at("seed"), "seed"))
                                                  : 0;
    config["seed"] = seed;
    const bool svg = options.svg || (config.contains("svg") && config.at("svg") == true);
    config.erase("svg");

    detail::Reader reader(config);
    auto result = detail::compute(options.mode, reader, seed);

    json resolved = reader.resolved();
    resolved["seed"] = seed;
    const auto lines = detail::preamble(options.mode, seed, resolved);

    std::error_code ec;
    std::filesystem::create_directories(options.out_dir, ec);
    if (ec) throw io::IoError("cannot create " + options.out_dir.string() + ": " + ec.message());

    const auto csv_path = options.out_dir / (options.mode + ".csv");
    io::write_file(csv_path, io::to_csv(result.table, lines));
    outcome.files.push_back(csv_path);

    json meta = {{"tool", "finite-key-lab"}, {"version", kVersion}, {"mode", options.mode},
                 {"seed", seed},             {"config", resolved},  {"columns", result.table.columns},
                 {"rows", result.table.rows.size()}, {"notes", result.notes}};
    const auto meta_path = options.out_dir / (options.mode + ".meta.json");
    io::write_file(meta_path, meta.dump(2) + "\n");
    outcome.files.push_back(meta_path);

    if (svg && !result.series.empty()) {
      const auto svg_path = options.out_dir / (options.mode + ".svg");
      io::write_file(svg_path, io::svg_line_chart(options.mode, result.table.columns.front(),
                                                  result.y_label, result.series, lines));
      outcome.files.push_back(svg_path);
    }
    outcome.message = "wrote " + csv_path.string();
  } catch (const io::IoError& e) {
    outcome.exit_code = 2;
    outcome.message = std::string("I/O error: ") + e.what();
  } catch (const std::invalid_argument& e) {
    outcome.exit_code = 1;
    outcome.message = std::string("invalid configuration: ") + e.what();
  } catch (const std::domain_error& e) {
    outcome.exit_code = 1;
    outcome.message = std::string("invalid configuration: ") + e.what();
  } catch (const std::length_error& e) {
    outcome.exit_code = 1;
    outcome.message = std::string("invalid configuration: ") + e.what();
  } catch (const nlohmann::json::exception& e) {
    outcome.exit_code = 1;
    outcome.message = std::string("invalid configuration: ") + e.what();
  }
  return outcome;
}

}  // namespace fkl::app
