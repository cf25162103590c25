#pragma once

// Monte Carlo detection streams for a chain model, coincidence pairing of
// single-party records, and plug-in estimates of I(N) and local bias.
//
// Trials are generated in fixed-size chunks. Chunk k draws from its own engine
// seeded by splitmix64(seed, k), so the stream depends only on the seed and
// never on how chunks are distributed over threads.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <type_traits>
#include <vector>

#include "chainbell/correlations.hpp"
#include "chainbell/errors.hpp"
#include "chainbell/functional.hpp"

namespace chainbell {

struct DetectionRecord {
  std::uint64_t trial_id = 0;
  Party party = Party::A;
  int setting_index = 0;
  Outcome outcome = Outcome::plus;
  std::int64_t timestamp_ns = 0;
  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

enum class SettingsPolicy { chain_pairs_uniform, independent_uniform };

struct GenerateOptions {
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  SettingsPolicy policy = SettingsPolicy::chain_pairs_uniform;
  std::int64_t period_ns = 1000;  // trial spacing of the source clock
  std::int64_t b_offset_ns = 0;   // B detector delay relative to A
  unsigned workers = 0;           // 0: hardware concurrency
};

inline constexpr std::uint64_t kTrialsPerChunk = 1u << 14;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t chunk_seed(std::uint64_t seed, std::uint64_t chunk) {
  return splitmix64(splitmix64(seed) ^ splitmix64(chunk + 0x632be59bd9b4e019ull));
}

/// Uniform in [0, 1) with 53 random bits.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform integer in [0, bound) by multiply-shift.
inline std::uint64_t below(std::mt19937_64& rng, std::uint64_t bound) {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(rng()) * bound) >> 64);
}

inline int sample_cell(const std::array<double, 4>& cdf, double u) {
  for (int k = 0; k < 3; ++k)
    if (u < cdf[k]) return k;
  return 3;
}

template <typename Fn>
void for_each_chunk(std::uint64_t chunks, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(chunks, 1)));
  if (workers <= 1) {
    for (std::uint64_t c = 0; c < chunks; ++c) fn(c);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::uint64_t c = w; c < chunks; c += workers) fn(c);
    });
}

}  // namespace detail

/// Two records per trial (A then B), trial ids 0..trials-1.
inline std::vector<DetectionRecord> generate_events(const ChainModel& model, const ChainConfig& config,
                                                    const GenerateOptions& opt) {
  if (opt.trials < 1) throw InputError("trials must be >= 1");
  if (opt.period_ns < 0 || opt.b_offset_ns < 0) throw InputError("clock parameters must be non-negative");
  const int n = config.n();

  // Cumulative tables for every pair the policy can select.
  std::vector<SettingPair> choices;
  if (opt.policy == SettingsPolicy::chain_pairs_uniform) {
    choices = config.pairs();
  } else {
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) choices.push_back({a, b});
  }
  std::vector<std::array<double, 4>> cdfs;
  cdfs.reserve(choices.size());
  for (const auto& p : choices) {
    const auto& t = model.joint(config, p).table();
    std::array<double, 4> c{};
    std::partial_sum(t.begin(), t.end(), c.begin());
    cdfs.push_back(c);
  }

  std::vector<DetectionRecord> out(2 * opt.trials);
  const std::uint64_t chunks = (opt.trials + kTrialsPerChunk - 1) / kTrialsPerChunk;
  detail::for_each_chunk(chunks, opt.workers, [&](std::uint64_t chunk) {
    std::mt19937_64 rng(detail::chunk_seed(opt.seed, chunk));
    const std::uint64_t lo = chunk * kTrialsPerChunk;
    const std::uint64_t hi = std::min(opt.trials, lo + kTrialsPerChunk);
    for (std::uint64_t t = lo; t < hi; ++t) {
      const auto k = detail::below(rng, choices.size());
      const int cell = detail::sample_cell(cdfs[k], detail::unit(rng));
      const Outcome a = cell < 2 ? Outcome::plus : Outcome::minus;
      const Outcome b = cell % 2 == 0 ? Outcome::plus : Outcome::minus;
      const auto ts = static_cast<std::int64_t>(t) * opt.period_ns;
      out[2 * t] = {t, Party::A, choices[k].a, a, ts};
      out[2 * t + 1] = {t, Party::B, choices[k].b, b, ts + opt.b_offset_ns};
    }
  });
  return out;
}

enum class PairingMode { by_trial_id, by_timestamp_window };

struct PairedCounts {
  int n = 0;
  /// Indexed a*N + b; cells (+,+), (+,-), (-,+), (-,-).
  std::vector<std::array<std::uint64_t, 4>> counts;
  std::uint64_t matched_pairs = 0;
  std::uint64_t orphan_records = 0;
  std::uint64_t ambiguous_records = 0;
  std::uint64_t input_records = 0;

  explicit PairedCounts(int order = 0) : n(order), counts(static_cast<std::size_t>(order) * order) {}

  const std::array<std::uint64_t, 4>& at(SettingPair p) const { return counts[static_cast<std::size_t>(p.a) * n + p.b]; }
  std::uint64_t total(SettingPair p) const {
    const auto& c = at(p);
    return c[0] + c[1] + c[2] + c[3];
  }
  void add(SettingPair p, Outcome a, Outcome b) {
    ++counts[static_cast<std::size_t>(p.a) * n + p.b][2 * outcome_index(a) + outcome_index(b)];
    ++matched_pairs;
  }
  friend bool operator==(const PairedCounts&, const PairedCounts&) = default;
};

/// Groups A/B records into coincidences. Trial-id mode pairs records sharing an
/// id; window mode pairs an A record with a B record only when each is the
/// other's unique partner within `window_ns`. Unpaired records are orphans;
/// records with several candidates are dropped as ambiguous.
inline PairedCounts pair_coincidences(const std::vector<DetectionRecord>& records, int n, PairingMode mode,
                                      std::int64_t window_ns = 0) {
  if (n < 1) throw InputError("chain order must be >= 1");
  PairedCounts pc(n);
  pc.input_records = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.setting_index < 0 || r.setting_index >= n)
      throw DataError("setting index " + std::to_string(r.setting_index) + " outside [0, " + std::to_string(n) + ")");
    if (r.timestamp_ns < 0) throw DataError("negative timestamp in record " + std::to_string(i));
  }

  if (mode == PairingMode::by_trial_id) {
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    auto by_id = [&](std::size_t x, std::size_t y) { return records[x].trial_id < records[y].trial_id; };
    if (!std::is_sorted(order.begin(), order.end(), by_id)) std::stable_sort(order.begin(), order.end(), by_id);
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i + 1;
      while (j < order.size() && records[order[j]].trial_id == records[order[i]].trial_id) ++j;
      const auto& first = records[order[i]];
      if (j - i == 1) {
        ++pc.orphan_records;
      } else if (j - i == 2 && first.party != records[order[i + 1]].party) {
        const auto& a = first.party == Party::A ? first : records[order[i + 1]];
        const auto& b = first.party == Party::A ? records[order[i + 1]] : first;
        pc.add({a.setting_index, b.setting_index}, a.outcome, b.outcome);
      } else {
        throw DataError("trial " + std::to_string(first.trial_id) + " has two records for the same party");
      }
      i = j;
    }
    return pc;
  }

  if (window_ns <= 0) throw InputError("timestamp pairing needs a positive window");
  std::vector<std::size_t> a_idx, b_idx;
  for (std::size_t i = 0; i < records.size(); ++i) (records[i].party == Party::A ? a_idx : b_idx).push_back(i);
  auto by_time = [&](std::size_t x, std::size_t y) { return records[x].timestamp_ns < records[y].timestamp_ns; };
  std::stable_sort(a_idx.begin(), a_idx.end(), by_time);
  std::stable_sort(b_idx.begin(), b_idx.end(), by_time);
  std::vector<std::int64_t> a_ts, b_ts;
  for (auto i : a_idx) a_ts.push_back(records[i].timestamp_ns);
  for (auto i : b_idx) b_ts.push_back(records[i].timestamp_ns);

  auto candidates = [window_ns](const std::vector<std::int64_t>& ts, std::int64_t t) {
    const auto lo = std::lower_bound(ts.begin(), ts.end(), t - window_ns);
    const auto hi = std::upper_bound(ts.begin(), ts.end(), t + window_ns);
    return std::pair{static_cast<std::size_t>(lo - ts.begin()), static_cast<std::size_t>(hi - lo)};
  };
  std::vector<std::size_t> b_candidates(b_idx.size());
  for (std::size_t k = 0; k < b_idx.size(); ++k) b_candidates[k] = candidates(a_ts, b_ts[k]).second;

  std::vector<bool> b_matched(b_idx.size(), false);
  for (std::size_t k = 0; k < a_idx.size(); ++k) {
    const auto [first, count] = candidates(b_ts, a_ts[k]);
    if (count == 0) {
      ++pc.orphan_records;
    } else if (count == 1 && b_candidates[first] == 1) {
      const auto& a = records[a_idx[k]];
      const auto& b = records[b_idx[first]];
      pc.add({a.setting_index, b.setting_index}, a.outcome, b.outcome);
      b_matched[first] = true;
    } else {
      ++pc.ambiguous_records;
    }
  }
  for (std::size_t k = 0; k < b_idx.size(); ++k) {
    if (b_matched[k]) continue;
    if (b_candidates[k] == 0)
      ++pc.orphan_records;
    else
      ++pc.ambiguous_records;
  }
  return pc;
}

struct EstimateResult {
  double value = 0.0;
  double std_error = 0.0;
  std::vector<double> per_term;  // same order as ChainConfig::pairs()
  std::vector<std::uint64_t> samples_per_pair;
};

/// Plug-in estimate of I(N) from coincidence counts, with independent-binomial
/// standard error sqrt(sum p(1-p)/m).
inline EstimateResult estimate_i(const PairedCounts& counts, const ChainConfig& config) {
  if (counts.n != config.n()) throw InputError("count table order does not match chain order");
  EstimateResult r;
  double variance = 0.0;
  bool closing = true;
  for (const auto& pair : config.pairs()) {
    const auto m = counts.total(pair);
    if (m == 0)
      throw EstimationError("no coincidences for setting pair (A" + std::to_string(pair.a) + ", B" +
                            std::to_string(pair.b) + ")");
    const auto& c = counts.at(pair);
    const auto equal = c[0] + c[3];
    const double p = static_cast<double>(closing ? equal : m - equal) / static_cast<double>(m);
    r.per_term.push_back(p);
    r.samples_per_pair.push_back(m);
    r.value += p;
    variance += p * (1.0 - p) / static_cast<double>(m);
    closing = false;
  }
  r.std_error = std::sqrt(variance);
  return r;
}

struct BiasCell {
  Party party = Party::A;
  int setting = 0;
  std::uint64_t count = 0;
  double p_plus = 0.0;
  double distance = 0.0;
  double std_error = 0.0;
};

struct MarginalBiasReport {
  std::vector<BiasCell> cells;  // A_0..A_{N-1}, then B_0..B_{N-1}
  std::size_t worst = 0;        // index into cells of the largest distance
  double worst_distance() const { return cells.at(worst).distance; }
  double worst_std_error() const { return cells.at(worst).std_error; }
};

/// Per-(party, setting) distance of the empirical +1 frequency from 1/2.
inline MarginalBiasReport estimate_marginal_bias(const std::vector<DetectionRecord>& records, int n) {
  if (n < 1) throw InputError("chain order must be >= 1");
  std::vector<std::uint64_t> total(2 * n, 0), plus(2 * n, 0);
  for (const auto& r : records) {
    if (r.setting_index < 0 || r.setting_index >= n) throw DataError("setting index outside chain");
    const std::size_t cell = (r.party == Party::A ? 0 : n) + r.setting_index;
    ++total[cell];
    if (r.outcome == Outcome::plus) ++plus[cell];
  }
  MarginalBiasReport rep;
  for (int k = 0; k < 2 * n; ++k) {
    const Party party = k < n ? Party::A : Party::B;
    const int setting = k % n;
    if (total[k] == 0)
      throw EstimationError(std::string("no records for ") + party_char(party) + "_" + std::to_string(setting));
    BiasCell c{party, setting, total[k]};
    c.p_plus = static_cast<double>(plus[k]) / static_cast<double>(total[k]);
    c.distance = statistical_distance_to_uniform(c.p_plus);
    c.std_error = std::sqrt(c.p_plus * (1.0 - c.p_plus) / static_cast<double>(total[k]));
    rep.cells.push_back(c);
    if (c.distance > rep.cells[rep.worst].distance) rep.worst = rep.cells.size() - 1;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Detection-record CSV: trial_id,party,setting_index,outcome,timestamp_ns

inline constexpr std::string_view kRecordHeader = "trial_id,party,setting_index,outcome,timestamp_ns";

inline void write_records_csv(std::ostream& os, const std::vector<DetectionRecord>& records) {
  os << kRecordHeader << '\n';
  for (const auto& r : records)
    os << r.trial_id << ',' << party_char(r.party) << ',' << r.setting_index << ','
       << (r.outcome == Outcome::plus ? "+1" : "-1") << ',' << r.timestamp_ns << '\n';
}

namespace detail {

template <typename Int>
Int parse_int(std::string_view field, std::size_t line, const char* what) {
  if (field.empty()) throw DataError(std::string("empty ") + what, line);
  std::size_t pos = 0;
  bool negative = false;
  if (field[0] == '-' || field[0] == '+') {
    negative = field[0] == '-';
    pos = 1;
  }
  if (pos == field.size()) throw DataError(std::string("bad ") + what + " '" + std::string(field) + "'", line);
  unsigned __int128 value = 0;
  for (; pos < field.size(); ++pos) {
    const char ch = field[pos];
    if (ch < '0' || ch > '9') throw DataError(std::string("bad ") + what + " '" + std::string(field) + "'", line);
    value = value * 10 + static_cast<unsigned>(ch - '0');
    if (value > static_cast<unsigned __int128>(UINT64_MAX))
      throw DataError(std::string(what) + " out of range", line);
  }
  if constexpr (std::is_unsigned_v<Int>) {
    if (negative && value != 0) throw DataError(std::string(what) + " must be non-negative", line);
    if (value > std::numeric_limits<Int>::max()) throw DataError(std::string(what) + " out of range", line);
    return static_cast<Int>(value);
  } else {
    if (value > static_cast<unsigned __int128>(std::numeric_limits<Int>::max()))
      throw DataError(std::string(what) + " out of range", line);
    const auto v = static_cast<Int>(value);
    return negative ? -v : v;
  }
}

}  // namespace detail

/// Parses a record file. Blank lines and a trailing newline are accepted;
/// anything else malformed raises DataError with its 1-based line number.
inline std::vector<DetectionRecord> read_records_csv(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  auto strip = [](std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  };
  if (!std::getline(is, line)) throw DataError("empty record file", 1);
  ++lineno;
  strip(line);
  if (line != kRecordHeader) throw DataError("expected header '" + std::string(kRecordHeader) + "'", lineno);

  std::vector<DetectionRecord> out;
  while (std::getline(is, line)) {
    ++lineno;
    strip(line);
    if (line.empty()) continue;
    std::array<std::string_view, 5> f;
    std::string_view rest = line;
    for (std::size_t k = 0; k < 5; ++k) {
      const auto comma = rest.find(',');
      if ((k < 4) == (comma == std::string_view::npos)) throw DataError("expected 5 comma-separated fields", lineno);
      f[k] = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    DetectionRecord r;
    r.trial_id = detail::parse_int<std::uint64_t>(f[0], lineno, "trial_id");
    if (f[1] == "A")
      r.party = Party::A;
    else if (f[1] == "B")
      r.party = Party::B;
    else
      throw DataError("party must be A or B", lineno);
    r.setting_index = detail::parse_int<int>(f[2], lineno, "setting_index");
    if (r.setting_index < 0) throw DataError("setting_index must be non-negative", lineno);
    if (f[3] == "+1")
      r.outcome = Outcome::plus;
    else if (f[3] == "-1")
      r.outcome = Outcome::minus;
    else
      throw DataError("outcome must be +1 or -1", lineno);
    r.timestamp_ns = detail::parse_int<std::int64_t>(f[4], lineno, "timestamp_ns");
    if (r.timestamp_ns < 0) throw DataError("timestamp_ns must be non-negative", lineno);
    out.push_back(r);
  }
  return out;
}

}  // namespace chainbell
