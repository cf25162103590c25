#pragma once

// Outcome distributions for one pair of measurement settings, and the
// correlation models that produce them across a chained Bell experiment.
//
// Settings are numbered by chain position: A-side setting j sits at chain
// index 2j, B-side setting k at chain index 2k+1. The evaluated pairs of a
// chain of order N are the 2N-1 neighbours (l_i, l_{i+1}) plus the closing
// pair (l_0, l_{2N-1}) = (A_0, B_{N-1}).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "chainbell/errors.hpp"

namespace chainbell {

inline constexpr double kProbabilityTol = 1e-12;

enum class Outcome : int { plus = 1, minus = -1 };
enum class Party { A, B };

inline constexpr int outcome_index(Outcome o) noexcept { return o == Outcome::plus ? 0 : 1; }
inline constexpr char party_char(Party p) noexcept { return p == Party::A ? 'A' : 'B'; }

/// Phase in radians. No wrapping is applied.
struct Phase {
  double radians = 0.0;
};

class Visibility {
 public:
  explicit Visibility(double v = 1.0) : v_(v) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("visibility must lie in [0, 1], got " + std::to_string(v));
  }
  double value() const noexcept { return v_; }

 private:
  double v_;
};

/// Unbalanced interferometer pair: long and short arm on each side.
struct InterferometerArms {
  double omega_a = 0.0;  // rad/s
  double omega_b = 0.0;  // rad/s
  double l_a = 0.0, s_a = 0.0;  // m
  double l_b = 0.0, s_b = 0.0;  // m
  double c = 299792458.0;  // m/s
};

inline Phase phase_from_arms(const InterferometerArms& arms) {
  const auto& r = arms;
  if (!(r.c > 0.0)) throw InputError("speed of light must be positive");
  if (!(r.omega_a > 0.0 && r.omega_b > 0.0)) throw InputError("frequencies must be positive");
  if (r.l_a < 0 || r.s_a < 0 || r.l_b < 0 || r.s_b < 0) throw InputError("arm lengths must be non-negative");
  if (r.l_a < r.s_a || r.l_b < r.s_b) throw InputError("long arm shorter than short arm");
  return Phase{r.omega_a * (r.l_a - r.s_a) / r.c + r.omega_b * (r.l_b - r.s_b) / r.c};
}

/// 2x2 table over (a, b); index 2*outcome_index(a) + outcome_index(b).
class JointDistribution {
 public:
  JointDistribution() = default;

  /// Order: (+,+), (+,-), (-,+), (-,-).
  static JointDistribution from_table(std::array<double, 4> p) {
    double sum = 0.0;
    for (double x : p) {
      if (!(x >= -kProbabilityTol && x <= 1.0 + kProbabilityTol))
        throw InputError("joint probability out of [0, 1]");
      sum += x;
    }
    if (std::abs(sum - 1.0) > kProbabilityTol) throw InputError("joint probabilities do not sum to 1");
    for (double& x : p) x = std::clamp(x, 0.0, 1.0);
    JointDistribution d;
    d.p_ = p;
    return d;
  }

  /// Equal mass split evenly over (+,+),(-,-); unequal mass over (+,-),(-,+).
  static JointDistribution symmetric(double pr_equal) {
    if (!(pr_equal >= -kProbabilityTol && pr_equal <= 1.0 + kProbabilityTol))
      throw InputError("pr_equal out of [0, 1]");
    pr_equal = std::clamp(pr_equal, 0.0, 1.0);
    const double e = 0.5 * pr_equal;
    const double d = 0.5 * (1.0 - pr_equal);
    JointDistribution j;
    j.p_ = {e, d, d, e};
    return j;
  }

  static JointDistribution point(Outcome a, Outcome b) {
    JointDistribution j;
    j.p_[2 * outcome_index(a) + outcome_index(b)] = 1.0;
    return j;
  }

  static JointDistribution uniform() { return from_table({0.25, 0.25, 0.25, 0.25}); }

  double at(Outcome a, Outcome b) const noexcept { return p_[2 * outcome_index(a) + outcome_index(b)]; }
  const std::array<double, 4>& table() const noexcept { return p_; }
  double pr_equal() const noexcept { return p_[0] + p_[3]; }
  double pr_diff() const noexcept { return 1.0 - pr_equal(); }
  double sum() const noexcept { return p_[0] + p_[1] + p_[2] + p_[3]; }

  friend bool operator==(const JointDistribution&, const JointDistribution&) = default;

 private:
  std::array<double, 4> p_{};
};

/// Probability that `party` observes +1.
inline double marginal(const JointDistribution& joint, Party party) noexcept {
  const auto& p = joint.table();
  return party == Party::A ? p[0] + p[1] : p[0] + p[2];
}

/// Total variation distance of a binary distribution from uniform.
inline double statistical_distance_to_uniform(double p_plus) {
  if (!(p_plus >= 0.0 && p_plus <= 1.0)) throw InputError("probability out of [0, 1]");
  return std::abs(p_plus - 0.5);
}

/// One setting on each side: A_a and B_b, indices in [0, N).
struct SettingPair {
  int a = 0;
  int b = 0;
  friend bool operator==(const SettingPair&, const SettingPair&) = default;
};

enum class PairKind { closing, adjacent, off_chain };

class ChainConfig {
 public:
  ChainConfig(int n, Phase theta, Visibility visibility = Visibility{1.0})
      : n_(n), theta_(theta), visibility_(visibility) {
    if (n < 2) throw InputError("chain order must be >= 2, got " + std::to_string(n));
    if (!std::isfinite(theta.radians)) throw InputError("theta must be finite");
    pairs_.reserve(2 * static_cast<std::size_t>(n));
    pairs_.push_back({0, n - 1});
    for (int i = 0; i + 1 < 2 * n; ++i) pairs_.push_back(neighbour_pair(i));
  }

  static ChainConfig make(int n, double theta, double visibility = 1.0) {
    return ChainConfig(n, Phase{theta}, Visibility{visibility});
  }

  int n() const noexcept { return n_; }
  Phase theta() const noexcept { return theta_; }
  Visibility visibility() const noexcept { return visibility_; }

  /// The 2N evaluated pairs; element 0 is the closing pair, then (l_i, l_{i+1}) for i = 0..2N-2.
  const std::vector<SettingPair>& pairs() const noexcept { return pairs_; }

  bool contains(SettingPair p) const noexcept { return p.a >= 0 && p.a < n_ && p.b >= 0 && p.b < n_; }

  PairKind kind(SettingPair p) const {
    require(p);
    if (p.a == 0 && p.b == n_ - 1) return PairKind::closing;
    if (p.b == p.a || p.b == p.a - 1) return PairKind::adjacent;
    return PairKind::off_chain;
  }

  /// Chain positions scaled by the equipartitioned step Theta/2N.
  double pair_phase(SettingPair p) const {
    require(p);
    const int offset = (2 * p.b + 1) - 2 * p.a;
    return offset * theta_.radians / (2.0 * n_);
  }

 private:
  void require(SettingPair p) const {
    if (!contains(p))
      throw InputError("setting pair (" + std::to_string(p.a) + ", " + std::to_string(p.b) +
                       ") outside chain of order " + std::to_string(n_));
  }
  static SettingPair neighbour_pair(int i) {
    // (l_i, l_{i+1}): even i is A_{i/2} then B_{i/2}; odd i is B_{(i-1)/2} then A_{(i+1)/2}.
    return i % 2 == 0 ? SettingPair{i / 2, i / 2} : SettingPair{(i + 1) / 2, (i - 1) / 2};
  }

  int n_;
  Phase theta_;
  Visibility visibility_;
  std::vector<SettingPair> pairs_;
};

/// Pre-assigned outcome per setting on each side.
struct LocalStrategy {
  std::vector<Outcome> a_outcomes;
  std::vector<Outcome> b_outcomes;
  friend bool operator==(const LocalStrategy&, const LocalStrategy&) = default;
};

inline LocalStrategy uniform_strategy(int n, Outcome o = Outcome::plus) {
  return LocalStrategy{std::vector<Outcome>(n, o), std::vector<Outcome>(n, o)};
}

inline JointDistribution lhv_joint(const LocalStrategy& s, SettingPair pair) {
  if (pair.a < 0 || pair.b < 0 || pair.a >= static_cast<int>(s.a_outcomes.size()) ||
      pair.b >= static_cast<int>(s.b_outcomes.size()))
    throw InputError("local strategy has no assignment for setting pair (" + std::to_string(pair.a) + ", " +
                     std::to_string(pair.b) + ")");
  return JointDistribution::point(s.a_outcomes[pair.a], s.b_outcomes[pair.b]);
}

inline JointDistribution quantum_joint(Phase phi, Visibility v) {
  return JointDistribution::symmetric(0.5 * (1.0 + v.value() * std::cos(phi.radians)));
}

inline JointDistribution chained_nlbox_joint(const ChainConfig& config, SettingPair pair) {
  switch (config.kind(pair)) {
    case PairKind::adjacent: return JointDistribution::symmetric(1.0);
    case PairKind::closing: return JointDistribution::symmetric(0.0);
    case PairKind::off_chain: break;
  }
  return JointDistribution::uniform();
}

// Model kinds.
struct QuantumModel {
  Visibility visibility{1.0};
};
struct DeterministicLocal {
  LocalStrategy strategy;
};
struct ChainedNLBox {};
/// Symmetric model with Pr(a=b) given as a function of the pair phase.
struct PhaseResponse {
  std::function<double(double)> pr_equal;
};
/// Explicit joint per setting combination, indexed a*N + b.
struct Tabulated {
  int n = 0;
  std::vector<JointDistribution> table;
};
class ChainModel;
struct Mixture {
  std::vector<double> weights;
  std::vector<ChainModel> components;
};

class ChainModel {
 public:
  using Kind = std::variant<QuantumModel, DeterministicLocal, ChainedNLBox, PhaseResponse, Tabulated, Mixture>;

  ChainModel(Kind kind) : kind_(std::move(kind)) { validate(); }  // NOLINT(implicit)

  static ChainModel quantum(double v) { return ChainModel(QuantumModel{Visibility{v}}); }
  static ChainModel local(LocalStrategy s) { return ChainModel(DeterministicLocal{std::move(s)}); }
  static ChainModel nlbox() { return ChainModel(ChainedNLBox{}); }
  static ChainModel mixture(std::vector<double> w, std::vector<ChainModel> c) {
    return ChainModel(Mixture{std::move(w), std::move(c)});
  }

  const Kind& kind() const noexcept { return kind_; }

  JointDistribution joint(const ChainConfig& config, SettingPair pair) const {
    return std::visit([&](const auto& m) { return joint_of(m, config, pair); }, kind_);
  }

  std::string name() const {
    struct {
      std::string operator()(const QuantumModel& m) const { return "quantum(V=" + std::to_string(m.visibility.value()) + ")"; }
      std::string operator()(const DeterministicLocal&) const { return "lhv"; }
      std::string operator()(const ChainedNLBox&) const { return "nlbox"; }
      std::string operator()(const PhaseResponse&) const { return "phase-response"; }
      std::string operator()(const Tabulated&) const { return "tabulated"; }
      std::string operator()(const Mixture& m) const {
        std::string s = "mixture(";
        for (std::size_t i = 0; i < m.components.size(); ++i)
          s += (i ? "," : "") + std::to_string(m.weights[i]) + "*" + m.components[i].name();
        return s + ")";
      }
    } namer;
    return std::visit(namer, kind_);
  }

 private:
  void validate() const {
    if (const auto* m = std::get_if<Mixture>(&kind_)) {
      if (m->weights.size() != m->components.size() || m->weights.empty())
        throw InputError("mixture needs one weight per component");
      double sum = 0.0;
      for (double w : m->weights) {
        if (!(w >= 0.0)) throw InputError("mixture weights must be non-negative");
        sum += w;
      }
      if (std::abs(sum - 1.0) > kProbabilityTol) throw InputError("mixture weights must sum to 1");
    }
    if (const auto* t = std::get_if<Tabulated>(&kind_)) {
      if (t->n < 1 || t->table.size() != static_cast<std::size_t>(t->n) * t->n)
        throw InputError("tabulated model needs N*N entries");
    }
    if (const auto* r = std::get_if<PhaseResponse>(&kind_); r && !r->pr_equal)
      throw InputError("phase response function is empty");
  }

  static JointDistribution joint_of(const QuantumModel& m, const ChainConfig& c, SettingPair p) {
    return quantum_joint(Phase{c.pair_phase(p)}, m.visibility);
  }
  static JointDistribution joint_of(const DeterministicLocal& m, const ChainConfig& c, SettingPair p) {
    c.kind(p);  // range check
    return lhv_joint(m.strategy, p);
  }
  static JointDistribution joint_of(const ChainedNLBox&, const ChainConfig& c, SettingPair p) {
    return chained_nlbox_joint(c, p);
  }
  static JointDistribution joint_of(const PhaseResponse& m, const ChainConfig& c, SettingPair p) {
    return JointDistribution::symmetric(m.pr_equal(c.pair_phase(p)));
  }
  static JointDistribution joint_of(const Tabulated& m, const ChainConfig& c, SettingPair p) {
    if (m.n != c.n()) throw InputError("tabulated model order does not match chain");
    c.kind(p);
    return m.table[static_cast<std::size_t>(p.a) * m.n + p.b];
  }
  static JointDistribution joint_of(const Mixture& m, const ChainConfig& c, SettingPair p) {
    std::array<double, 4> acc{};
    for (std::size_t i = 0; i < m.components.size(); ++i) {
      const auto& t = m.components[i].joint(c, p).table();
      for (std::size_t k = 0; k < 4; ++k) acc[k] += m.weights[i] * t[k];
    }
    return JointDistribution::from_table(acc);
  }

  Kind kind_;
};

struct NoSignalingReport {
  bool passed = true;
  double max_deviation = 0.0;
  std::vector<std::string> violations;
};

/// Each party's marginal for each own setting must not depend on the remote setting.
inline NoSignalingReport no_signaling_check(const ChainModel& model, const ChainConfig& config,
                                            double tol = kProbabilityTol) {
  NoSignalingReport report;
  const int n = config.n();
  auto note = [&](Party party, int own, int remote, double dev) {
    report.max_deviation = std::max(report.max_deviation, dev);
    if (dev > tol) {
      report.passed = false;
      report.violations.push_back(std::string(1, party_char(party)) + "_" + std::to_string(own) +
                                  " marginal shifts by " + std::to_string(dev) + " under remote setting " +
                                  std::to_string(remote));
    }
  };
  for (int own = 0; own < n; ++own) {
    const double ref_a = marginal(model.joint(config, {own, 0}), Party::A);
    const double ref_b = marginal(model.joint(config, {0, own}), Party::B);
    for (int remote = 1; remote < n; ++remote) {
      note(Party::A, own, remote, std::abs(marginal(model.joint(config, {own, remote}), Party::A) - ref_a));
      note(Party::B, own, remote, std::abs(marginal(model.joint(config, {remote, own}), Party::B) - ref_b));
    }
  }
  return report;
}

/// Worst-case local bias: max over parties and settings of the distance to
/// uniform. Marginals are read off the evaluated pairs of the chain.
inline double worst_case_bias(const ChainModel& model, const ChainConfig& config) {
  double worst = 0.0;
  for (const auto& p : config.pairs()) {
    const auto j = model.joint(config, p);
    worst = std::max({worst, statistical_distance_to_uniform(std::clamp(marginal(j, Party::A), 0.0, 1.0)),
                      statistical_distance_to_uniform(std::clamp(marginal(j, Party::B), 0.0, 1.0))});
  }
  return worst;
}

}  // namespace chainbell
