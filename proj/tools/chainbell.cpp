// chainbell: chained Bell functional, local bounds, simulation and timing.
//
//   chainbell curves      --n 2,3,4 --visibility 0.97 --out curves.csv
//   chainbell simulate    --model quantum --n 2 --theta 3.14159 --trials 1000000 --seed 42 --records r.csv
//   chainbell estimate    --records r.csv --n 2
//   chainbell lhv-bound   --n 3
//   chainbell optimal-n   --visibility 0.97 --n-max 20
//   chainbell bias-bound  --n 2 --theta 3.14159 --visibility 0.97
//   chainbell timing      --events 0,0,0,30 --betas -0.5,0.5
//
// Every subcommand accepts --config FILE with flat `key = value` lines named
// after the long flags; flags on the command line win.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chainbell/commands.hpp"

namespace cb = chainbell;
namespace cli = chainbell::cli;

namespace {

int emit(const cli::json& j, const std::string& out) {
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
    return cli::kOk;
  }
  std::ofstream f(out);
  if (!f) throw cli::CommandError(cli::kUsage, "cannot write '" + out + "'");
  f << j.dump(2) << '\n';
  return cli::kOk;
}

const std::map<std::string, cb::SettingsPolicy> kPolicies{
    {"chain-pairs-uniform", cb::SettingsPolicy::chain_pairs_uniform},
    {"independent-uniform", cb::SettingsPolicy::independent_uniform}};
const std::map<std::string, cb::PairingMode> kPairings{{"by-trial-id", cb::PairingMode::by_trial_id},
                                                      {"by-timestamp-window", cb::PairingMode::by_timestamp_window}};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") + 1 - b);
}

// Replaces `--config FILE` with the flags it names. CLI11 only reads config
// files on the top-level app, so subcommand files are expanded here.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (path.empty()) return args;
  std::ifstream f(path);
  if (!f) throw cli::CommandError(cli::kUsage, "cannot read config '" + path + "'");
  auto given = [&](const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
  };
  std::vector<std::string> extra;
  std::string line;
  for (int number = 1; std::getline(f, line); ++number) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw cli::CommandError(cli::kUsage, path + ":" + std::to_string(number) + ": expected key = value");
    const std::string flag = "--" + trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (given(flag)) continue;
    extra.push_back(flag + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chained Bell experiment calculator and simulator"};
  app.require_subcommand(1);

  // curves
  cli::CurvesOptions curves;
  auto* c_curves = app.add_subcommand("curves", "I(N, Theta) table as CSV");
  c_curves->add_option("--n", curves.n_list, "Chain orders")->delimiter(',');
  c_curves->add_option("--theta-min", curves.theta_min, "Lower end of the Theta grid (rad)");
  c_curves->add_option("--theta-max", curves.theta_max, "Upper end of the Theta grid (rad)");
  c_curves->add_option("--steps", curves.steps, "Grid points including both ends");
  c_curves->add_option("--visibility", curves.visibility, "Visibility V in [0, 1]");
  c_curves->add_option("--out", curves.out, "Output CSV (default stdout)");

  // simulate
  cli::SimulateOptions sim;
  std::string sim_policy = "chain-pairs-uniform", sim_pairing = "by-trial-id";
  auto* c_sim = app.add_subcommand("simulate", "Monte Carlo detection records plus JSON summary");
  c_sim->add_option("--model", sim.model.kind, "quantum | nlbox | lhv | mixture");
  c_sim->add_option("--strategy", sim.model.strategy, "Local strategy, e.g. A:+-,B:++");
  c_sim->add_option("--components", sim.model.components, "Mixture components")->delimiter(',');
  c_sim->add_option("--weights", sim.model.weights, "Mixture weights")->delimiter(',');
  c_sim->add_option("--n", sim.n, "Chain order N");
  c_sim->add_option("--theta", sim.theta, "Total phase Theta (rad)");
  c_sim->add_option("--visibility", sim.visibility, "Visibility V");
  c_sim->add_option("--trials", sim.trials, "Number of emitted pairs");
  c_sim->add_option("--seed", sim.seed, "Master seed");
  c_sim->add_option("--policy", sim_policy, "chain-pairs-uniform | independent-uniform");
  c_sim->add_option("--pairing", sim_pairing, "by-trial-id | by-timestamp-window");
  c_sim->add_option("--window-ns", sim.window_ns, "Coincidence window for timestamp pairing");
  c_sim->add_option("--records", sim.records_out, "Detection-record CSV to write")->required();
  c_sim->add_option("--out", sim.summary_out, "Summary JSON (default stdout)");
  c_sim->add_option("--workers", sim.workers, "Generator threads (0: all cores)");

  // estimate
  cli::EstimateOptions est;
  std::string est_pairing = "by-trial-id", est_out;
  auto* c_est = app.add_subcommand("estimate", "Estimate I(N) and local bias from a record CSV");
  c_est->add_option("--records", est.records_path, "Detection-record CSV")->required();
  c_est->add_option("--n", est.n, "Chain order N");
  c_est->add_option("--pairing", est_pairing, "by-trial-id | by-timestamp-window");
  c_est->add_option("--window-ns", est.window_ns, "Coincidence window for timestamp pairing");
  c_est->add_option("--out", est_out, "Report JSON (default stdout)");

  // lhv-bound
  int lhv_n = 2;
  double lhv_theta = cb::kPi;
  std::string lhv_out;
  auto* c_lhv = app.add_subcommand("lhv-bound", "Exhaustive local minimum of I(N)");
  c_lhv->add_option("--n", lhv_n, "Chain order N");
  c_lhv->add_option("--theta", lhv_theta, "Total phase (does not affect local strategies)");
  c_lhv->add_option("--out", lhv_out, "Report JSON (default stdout)");

  // optimal-n
  double opt_v = 0.97;
  int opt_nmax = 20;
  std::string opt_out;
  auto* c_opt = app.add_subcommand("optimal-n", "Chain order minimising I(N, pi)");
  c_opt->add_option("--visibility", opt_v, "Visibility V");
  c_opt->add_option("--n-max", opt_nmax, "Largest order scanned");
  c_opt->add_option("--out", opt_out, "Report JSON (default stdout)");

  // bias-bound
  int bb_n = 2;
  double bb_theta = cb::kPi, bb_v = 1.0;
  std::string bb_out;
  auto* c_bb = app.add_subcommand("bias-bound", "Quantum I(N) and the bound D <= I/2");
  c_bb->add_option("--n", bb_n, "Chain order N");
  c_bb->add_option("--theta", bb_theta, "Total phase Theta (rad)");
  c_bb->add_option("--visibility", bb_v, "Visibility V");
  c_bb->add_option("--out", bb_out, "Report JSON (default stdout)");

  // timing
  cli::TimingOptions tim;
  std::vector<double> events, betas;
  std::string tim_out;
  auto* c_tim = app.add_subcommand("timing", "Before-before check for two moving analyzers");
  c_tim->add_option("--events", events, "tA,xA,tB,xB in seconds and meters")->delimiter(',')->expected(4)->required();
  c_tim->add_option("--betas", betas, "betaA,betaB")->delimiter(',')->expected(2)->required();
  c_tim->add_option("--c", tim.c, "Speed of light (m/s)");
  c_tim->add_option("--out", tim_out, "Report JSON (default stdout)");

  for (auto* sub : {c_curves, c_sim, c_est, c_lhv, c_opt, c_bb, c_tim})
    sub->add_option("--config", "Flat key = value file mirroring the flags");

  try {
    auto args = expand_config(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const cli::CommandError& e) {
    std::cerr << "chainbell: " << e.what() << '\n';
    return e.exit_code();
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? cli::kOk : cli::kUsage;
  }

  try {
    if (*c_curves) {
      cli::run_curves(curves, std::cout);
      return cli::kOk;
    }
    if (*c_sim) {
      if (!kPolicies.count(sim_policy)) throw cli::CommandError(cli::kUsage, "unknown policy '" + sim_policy + "'");
      if (!kPairings.count(sim_pairing)) throw cli::CommandError(cli::kUsage, "unknown pairing '" + sim_pairing + "'");
      sim.policy = kPolicies.at(sim_policy);
      sim.pairing = kPairings.at(sim_pairing);
      return emit(cli::run_simulate(sim), sim.summary_out);
    }
    if (*c_est) {
      if (!kPairings.count(est_pairing)) throw cli::CommandError(cli::kUsage, "unknown pairing '" + est_pairing + "'");
      est.pairing = kPairings.at(est_pairing);
      return emit(cli::run_estimate(est), est_out);
    }
    if (*c_lhv) return emit(cli::run_lhv_bound(lhv_n, lhv_theta), lhv_out);
    if (*c_opt) return emit(cli::run_optimal_n(opt_v, opt_nmax), opt_out);
    if (*c_bb) return emit(cli::run_bias_bound(bb_n, bb_theta, bb_v), bb_out);
    if (*c_tim) {
      tim.a = {events[0], events[1]};
      tim.b = {events[2], events[3]};
      tim.beta_a = betas[0];
      tim.beta_b = betas[1];
      return emit(cli::run_timing(tim), tim_out);
    }
  } catch (const cli::CommandError& e) {
    std::cerr << "chainbell: " << e.what() << '\n';
    return e.exit_code();
  }
  return cli::kUsage;
}
