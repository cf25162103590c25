#pragma once

// Command implementations behind the `chainbell` tool. Each command resolves
// its options, runs the library, and returns a JSON report (or writes a CSV).
// Failures surface as CommandError carrying the process exit code:
//   0 success, 2 usage/config, 3 simulation, 4 data ingestion.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chainbell/correlations.hpp"
#include "chainbell/functional.hpp"
#include "chainbell/oracle.hpp"
#include "chainbell/simulate.hpp"
#include "chainbell/timing.hpp"

namespace chainbell::cli {

using nlohmann::json;

enum ExitCode : int { kOk = 0, kUsage = 2, kSimulation = 3, kIngestion = 4 };

class CommandError : public std::runtime_error {
 public:
  CommandError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
  int exit_code() const noexcept { return code_; }

 private:
  int code_;
};

/// Seven significant digits, as used for every CSV number.
inline std::string format_g7(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.7g", x);
  return buf;
}

inline std::string strategy_to_string(const LocalStrategy& s) {
  std::string out = "A:";
  for (auto o : s.a_outcomes) out += o == Outcome::plus ? '+' : '-';
  out += ",B:";
  for (auto o : s.b_outcomes) out += o == Outcome::plus ? '+' : '-';
  return out;
}

/// Parses "A:+-+,B:++-"; an empty string means every setting answers +1.
inline LocalStrategy parse_strategy(std::string_view text, int n) {
  if (text.empty()) return uniform_strategy(n);
  LocalStrategy s;
  auto side = [&](std::string_view part, char label, std::vector<Outcome>& dst) {
    if (part.size() < 2 || part[0] != label || part[1] != ':')
      throw InputError(std::string("strategy side must start with '") + label + ":'");
    for (char ch : part.substr(2)) {
      if (ch == '+')
        dst.push_back(Outcome::plus);
      else if (ch == '-')
        dst.push_back(Outcome::minus);
      else
        throw InputError("strategy outcomes must be '+' or '-'");
    }
    if (static_cast<int>(dst.size()) != n)
      throw InputError(std::string("strategy needs ") + std::to_string(n) + " outcomes for side " + label);
  };
  const auto comma = text.find(',');
  if (comma == std::string_view::npos) throw InputError("strategy must look like A:+-,B:++");
  side(text.substr(0, comma), 'A', s.a_outcomes);
  side(text.substr(comma + 1), 'B', s.b_outcomes);
  return s;
}

struct ModelSpec {
  std::string kind = "quantum";  // quantum | nlbox | lhv | mixture
  std::string strategy;          // for lhv components
  std::vector<std::string> components;
  std::vector<double> weights;
};

inline ChainModel build_model(const ModelSpec& spec, int n, double visibility) {
  auto simple = [&](const std::string& kind) -> ChainModel {
    if (kind == "quantum") return ChainModel::quantum(visibility);
    if (kind == "nlbox") return ChainModel::nlbox();
    if (kind == "lhv") return ChainModel::local(parse_strategy(spec.strategy, n));
    throw InputError("unknown model kind '" + kind + "'");
  };
  if (spec.kind != "mixture") return simple(spec.kind);
  if (spec.components.empty()) throw InputError("mixture needs --components");
  std::vector<ChainModel> parts;
  for (const auto& c : spec.components) parts.push_back(simple(c));
  return ChainModel::mixture(spec.weights, std::move(parts));
}

inline json model_json(const ModelSpec& spec) {
  json j{{"kind", spec.kind}};
  if (!spec.strategy.empty()) j["strategy"] = spec.strategy;
  if (spec.kind == "mixture") {
    j["components"] = spec.components;
    j["weights"] = spec.weights;
  }
  return j;
}

inline const char* policy_name(SettingsPolicy p) {
  return p == SettingsPolicy::chain_pairs_uniform ? "chain-pairs-uniform" : "independent-uniform";
}
inline const char* pairing_name(PairingMode m) {
  return m == PairingMode::by_trial_id ? "by-trial-id" : "by-timestamp-window";
}

// ---------------------------------------------------------------------------
// curves

struct CurvesOptions {
  std::vector<int> n_list{2, 3, 4, 5, 6, 7};
  double theta_min = 0.0;
  double theta_max = 2.0 * kPi;
  int steps = 512;
  double visibility = 1.0;
  std::string out;  // empty: stdout
};

inline void write_curves_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
  os << "n,theta_rad,i_value\n";
  for (const auto& r : rows) os << r.n << ',' << format_g7(r.theta) << ',' << format_g7(r.i_value) << '\n';
}

inline std::vector<CurveRow> run_curves(const CurvesOptions& opt, std::ostream& stdout_sink) {
  std::vector<CurveRow> rows;
  try {
    if (opt.steps < 2) throw InputError("steps must be >= 2");
    if (opt.n_list.empty()) throw InputError("n list is empty");
    rows = curve_table(opt.n_list, linear_grid(opt.theta_min, opt.theta_max, opt.steps), opt.visibility);
  } catch (const InputError& e) {
    throw CommandError(kUsage, e.what());
  }
  if (opt.out.empty()) {
    write_curves_csv(stdout_sink, rows);
  } else {
    std::ofstream f(opt.out);
    if (!f) throw CommandError(kUsage, "cannot write '" + opt.out + "'");
    write_curves_csv(f, rows);
    if (!f) throw CommandError(kUsage, "write to '" + opt.out + "' failed");
  }
  return rows;
}

// ---------------------------------------------------------------------------
// simulate / estimate

/// Everything derivable from a record stream alone; shared by simulate and
/// estimate so that the two agree exactly on the same records.
inline json analyze_records(const std::vector<DetectionRecord>& records, int n, PairingMode pairing,
                            std::int64_t window_ns) {
  const auto config = ChainConfig::make(n, 0.0);
  const auto counts = pair_coincidences(records, n, pairing, window_ns);
  const auto est = estimate_i(counts, config);
  const auto bias = estimate_marginal_bias(records, n);

  json pairs = json::array();
  for (std::size_t k = 0; k < config.pairs().size(); ++k) {
    const auto p = config.pairs()[k];
    const auto& c = counts.at(p);
    pairs.push_back({{"a_setting", p.a},
                     {"b_setting", p.b},
                     {"role", k == 0 ? "closing" : "neighbour"},
                     {"counts", {{"pp", c[0]}, {"pm", c[1]}, {"mp", c[2]}, {"mm", c[3]}}},
                     {"term", est.per_term[k]}});
  }
  json cells = json::array();
  for (const auto& c : bias.cells)
    cells.push_back({{"party", std::string(1, party_char(c.party))},
                     {"setting", c.setting},
                     {"count", c.count},
                     {"p_plus", c.p_plus},
                     {"distance", c.distance},
                     {"std_error", c.std_error}});

  const double bound = est.value / 2.0;
  const double combined = std::sqrt(bias.worst_std_error() * bias.worst_std_error() +
                                    0.25 * est.std_error * est.std_error);
  return {{"coincidences",
           {{"matched_pairs", counts.matched_pairs},
            {"orphan_records", counts.orphan_records},
            {"ambiguous_records", counts.ambiguous_records},
            {"input_records", counts.input_records}}},
          {"pairs", pairs},
          {"estimate", {{"i_value", est.value}, {"std_error", est.std_error}, {"samples_per_pair", est.samples_per_pair}}},
          {"bias",
           {{"cells", cells},
            {"worst_distance", bias.worst_distance()},
            {"worst_std_error", bias.worst_std_error()},
            {"bias_bound", bound},
            {"combined_std_error", combined},
            {"bound_consistent", bias.worst_distance() <= bound + 3.0 * combined}}}};
}

struct SimulateOptions {
  ModelSpec model;
  int n = 2;
  double theta = kPi;
  double visibility = 1.0;
  std::uint64_t trials = 1'000'000;
  std::uint64_t seed = 42;
  SettingsPolicy policy = SettingsPolicy::chain_pairs_uniform;
  PairingMode pairing = PairingMode::by_trial_id;
  std::int64_t window_ns = 500;
  std::string records_out;  // required
  std::string summary_out;  // empty: stdout
  unsigned workers = 0;
};

inline json run_simulate(const SimulateOptions& opt) {
  if (opt.records_out.empty()) throw CommandError(kUsage, "simulate needs --records");
  json summary;
  std::vector<DetectionRecord> records;
  try {
    const auto config = ChainConfig::make(opt.n, opt.theta, opt.visibility);
    const auto model = build_model(opt.model, opt.n, opt.visibility);
    GenerateOptions g;
    g.trials = opt.trials;
    g.seed = opt.seed;
    g.policy = opt.policy;
    g.workers = opt.workers;
    records = generate_events(model, config, g);
    const auto exact = i_functional(model, config);
    summary["config"] = {{"command", "simulate"},
                         {"model", model_json(opt.model)},
                         {"n", opt.n},
                         {"theta", opt.theta},
                         {"visibility", opt.visibility},
                         {"trials", opt.trials},
                         {"seed", opt.seed},
                         {"policy", policy_name(opt.policy)},
                         {"pairing", pairing_name(opt.pairing)},
                         {"window_ns", opt.window_ns},
                         {"records", opt.records_out}};
    summary["expected"] = {{"i_value", exact.i_value},
                           {"bias_bound", bias_bound(exact.i_value)},
                           {"worst_case_bias", worst_case_bias(model, config)}};
    summary["report"] = analyze_records(records, opt.n, opt.pairing, opt.window_ns);
  } catch (const CommandError&) {
    throw;
  } catch (const std::exception& e) {
    throw CommandError(kSimulation, e.what());
  }
  std::ofstream f(opt.records_out);
  if (!f) throw CommandError(kUsage, "cannot write '" + opt.records_out + "'");
  write_records_csv(f, records);
  if (!f) throw CommandError(kUsage, "write to '" + opt.records_out + "' failed");
  return summary;
}

struct EstimateOptions {
  std::string records_path;
  int n = 2;
  PairingMode pairing = PairingMode::by_trial_id;
  std::int64_t window_ns = 500;
};

inline json run_estimate(const EstimateOptions& opt) {
  std::ifstream f(opt.records_path);
  if (!f) throw CommandError(kIngestion, "cannot read '" + opt.records_path + "'");
  try {
    if (opt.n < 2) throw InputError("chain order must be >= 2");
    const auto records = read_records_csv(f);
    json out;
    out["config"] = {{"command", "estimate"},
                     {"records", opt.records_path},
                     {"n", opt.n},
                     {"pairing", pairing_name(opt.pairing)},
                     {"window_ns", opt.window_ns}};
    out["report"] = analyze_records(records, opt.n, opt.pairing, opt.window_ns);
    return out;
  } catch (const InputError& e) {
    throw CommandError(kUsage, e.what());
  } catch (const std::exception& e) {
    throw CommandError(kIngestion, e.what());
  }
}

// ---------------------------------------------------------------------------
// small reports

template <typename Fn>
json usage_guard(Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    throw CommandError(kUsage, e.what());
  } catch (const CapacityError& e) {
    throw CommandError(kUsage, e.what());
  }
}

inline json run_lhv_bound(int n, double theta) {
  return usage_guard([&] {
    const auto r = lhv_minimum(n, theta);
    return json{{"config", {{"command", "lhv-bound"}, {"n", n}, {"theta", theta}}},
                {"min_i", r.min_i},
                {"witness", strategy_to_string(r.witness)},
                {"witness_i", i_functional(ChainModel::local(r.witness), ChainConfig::make(n, theta)).i_value},
                {"method", r.analytic ? "analytic" : "enumeration"},
                {"strategies", r.analytic ? json(nullptr) : json(std::uint64_t{1} << (2 * n))}};
  });
}

inline json run_optimal_n(double v, int n_max) {
  return usage_guard([&] {
    const auto best = optimal_chain_length(v, n_max);
    json table = json::array();
    for (int n = 2; n <= n_max; ++n) table.push_back({{"n", n}, {"i_value", i_quantum_closed_form(n, kPi, v)}});
    return json{{"config", {{"command", "optimal-n"}, {"visibility", v}, {"n_max", n_max}, {"theta", kPi}}},
                {"n_star", best.n},
                {"i_min", best.i_min},
                {"bias_bound", bias_bound(best.i_min)},
                {"scan", table}};
  });
}

inline json run_bias_bound(int n, double theta, double v) {
  return usage_guard([&] {
    const double i = i_quantum_closed_form(n, theta, v);
    const double d = bias_bound(i);
    return json{{"config", {{"command", "bias-bound"}, {"n", n}, {"theta", theta}, {"visibility", v}}},
                {"i_value", i},
                {"bias_bound", d},
                {"bias_bound_rounded", std::round(d * 1e4) / 1e4},
                {"violates_locality", i < 1.0},
                {"violation_margin", 1.0 - i}};
  });
}

struct TimingOptions {
  SpacetimeEvent a, b;
  double beta_a = 0.0, beta_b = 0.0;
  double c = kSpeedOfLight;
};

inline json run_timing(const TimingOptions& o) {
  return usage_guard([&] {
    const auto r = before_before_holds(o.a, o.b, FrameVelocity{o.beta_a}, FrameVelocity{o.beta_b}, o.c);
    json j{{"config",
            {{"command", "timing"},
             {"event_a", {{"t", o.a.t}, {"x", o.a.x}}},
             {"event_b", {{"t", o.b.t}, {"x", o.b.x}}},
             {"beta_a", o.beta_a},
             {"beta_b", o.beta_b},
             {"c", o.c}}},
           {"before_before", r.holds},
           {"spacelike", r.spacelike},
           {"reason", r.reason},
           {"frame_a", {{"t_a", r.a_frame_t_a}, {"t_b", r.a_frame_t_b}, {"a_first", r.a_first_in_a_frame}}},
           {"frame_b", {{"t_a", r.b_frame_t_a}, {"t_b", r.b_frame_t_b}, {"b_first", r.b_first_in_b_frame}}}};
    if (r.spacelike) {
      const auto ta = min_speed_for_priority(o.a.t - o.b.t, o.b.x - o.a.x, o.c);
      const auto tb = min_speed_for_priority(o.b.t - o.a.t, o.a.x - o.b.x, o.c);
      j["threshold_a"] = {{"min_speed", ta.min_speed}, {"direction", ta.direction}};
      j["threshold_b"] = {{"min_speed", tb.min_speed}, {"direction", tb.direction}};
    }
    return j;
  });
}

}  // namespace chainbell::cli
