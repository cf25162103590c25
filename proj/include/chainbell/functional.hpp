#pragma once

// The chained Bell functional
//
//   I(N) = Pr(a=b | closing pair) + sum over the 2N-1 neighbour pairs of Pr(a!=b)
//
// together with its closed form for the quantum model, the bias bound D <= I/2,
// and grid-based checkers for the scaling/symmetry/smoothness conditions and
// the two theorems built on them.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "chainbell/correlations.hpp"
#include "chainbell/errors.hpp"

namespace chainbell {

inline constexpr double kPi = std::numbers::pi;
inline constexpr int kDefaultGridPoints = 2048;
inline constexpr double kDefaultTheoremTol = 1e-9;

inline Phase equipartition_phase(int n, double theta) {
  if (n < 2) throw InputError("chain order must be >= 2, got " + std::to_string(n));
  return Phase{theta / (2.0 * n)};
}

struct BellReport {
  double i_value = 0.0;
  int n = 0;
  double theta = 0.0;
  double visibility = 1.0;
  std::vector<double> per_term;  // closing term first, then neighbours in chain order
  bool violates_locality = false;
};

inline BellReport i_functional(const ChainModel& model, const ChainConfig& config) {
  BellReport r;
  r.n = config.n();
  r.theta = config.theta().radians;
  r.visibility = config.visibility().value();
  r.per_term.reserve(config.pairs().size());
  bool closing = true;
  for (const auto& pair : config.pairs()) {
    const auto joint = model.joint(config, pair);
    r.per_term.push_back(closing ? joint.pr_equal() : joint.pr_diff());
    r.i_value += r.per_term.back();
    closing = false;
  }
  r.violates_locality = r.i_value < 1.0;
  return r;
}

/// Quantum I(N, Theta) with visibility V.
inline double i_quantum_closed_form(int n, double theta, double v) {
  if (n < 2) throw InputError("chain order must be >= 2, got " + std::to_string(n));
  const double vis = Visibility{v}.value();
  const double step = theta / (2.0 * n);
  const double closing = 0.5 * (1.0 + vis * std::cos((2 * n - 1) * step));
  const double neighbours = 0.5 * (2 * n - 1) * (1.0 - vis * std::cos(step));
  return closing + neighbours;
}

/// Upper bound on the statistical distance of local outcomes from uniform.
inline double bias_bound(double i_value) {
  if (!(i_value >= 0.0)) throw InputError("functional value must be non-negative");
  return i_value / 2.0;
}

struct OptimalChain {
  int n = 0;
  double i_min = 0.0;
};

/// Chain order in [2, n_max] minimising I(N, pi); ties go to the smaller order.
inline OptimalChain optimal_chain_length(double v, int n_max) {
  if (n_max < 2) throw InputError("n_max must be >= 2");
  OptimalChain best{2, i_quantum_closed_form(2, kPi, v)};
  for (int n = 3; n <= n_max; ++n) {
    const double i = i_quantum_closed_form(n, kPi, v);
    if (i < best.i_min) best = {n, i};
  }
  return best;
}

struct CurveRow {
  int n = 0;
  double theta = 0.0;
  double i_value = 0.0;
};

inline std::vector<CurveRow> curve_table(const std::vector<int>& n_list, const std::vector<double>& theta_grid,
                                         double v) {
  std::vector<CurveRow> rows;
  rows.reserve(n_list.size() * theta_grid.size());
  for (int n : n_list)
    for (double theta : theta_grid) rows.push_back({n, theta, i_quantum_closed_form(n, theta, v)});
  return rows;
}

/// `points` evenly spaced values over [lo, hi], endpoints included.
inline std::vector<double> linear_grid(double lo, double hi, int points) {
  if (points < 2) throw InputError("grid needs at least 2 points");
  if (!(hi > lo)) throw InputError("grid upper bound must exceed lower bound");
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k) g[k] = lo + (hi - lo) * k / (points - 1);
  g.back() = hi;
  return g;
}

// ---------------------------------------------------------------------------
// Families and condition checks

/// Theta-parameterised model, defined on [theta_lo, theta_hi] for every order N.
struct CorrelationFamily {
  std::string name;
  double theta_lo = 0.0;
  double theta_hi = 2.0 * kPi;
  std::function<ChainModel(int n, double theta)> model;

  bool in_domain(double theta, double slack = 1e-12) const {
    return theta >= theta_lo - slack && theta <= theta_hi + slack;
  }
  double i_value(int n, double theta) const {
    return i_functional(model(n, theta), ChainConfig::make(n, theta)).i_value;
  }
};

inline CorrelationFamily quantum_family(double v, double lo = 0.0, double hi = 2.0 * kPi) {
  Visibility vis{v};
  return {"quantum(V=" + std::to_string(v) + ")", lo, hi,
          [vis](int, double) { return ChainModel(QuantumModel{vis}); }};
}

inline CorrelationFamily nlbox_family(double lo = 0.0, double hi = 2.0 * kPi) {
  return {"nlbox", lo, hi, [](int, double) { return ChainModel::nlbox(); }};
}

inline CorrelationFamily lhv_family(Outcome o = Outcome::plus, double lo = 0.0, double hi = 2.0 * kPi) {
  return {"lhv", lo, hi, [o](int n, double) { return ChainModel::local(uniform_strategy(n, o)); }};
}

/// Symmetric family with Pr(a=b) a fixed function of the pair phase.
inline CorrelationFamily phase_response_family(std::string name, std::function<double(double)> pr_equal,
                                               double lo, double hi) {
  return {std::move(name), lo, hi,
          [f = std::move(pr_equal)](int, double) { return ChainModel(PhaseResponse{f}); }};
}

struct ConditionReport {
  bool passed = true;
  bool scaling_checked = false;   // Pr(a=b | phi=0) = 1
  bool scaling_holds = true;
  bool symmetry_holds = true;     // Pr(a=b | phi) = Pr(a!=b | pi - phi)
  std::size_t symmetry_comparisons = 0;
  double scaling_worst = 1.0;     // smallest Pr(a=b) seen at phi = 0
  std::vector<std::string> failures;
};

/// Checks scaling and symmetry for order-`n` chains on a grid over the family domain.
/// Symmetry compares a pair at Theta with the same pair at the Theta' that puts
/// its phase at pi - phi; comparisons leaving the domain are skipped.
inline ConditionReport check_basic_conditions(const CorrelationFamily& family, int n = 2,
                                              int grid_points = kDefaultGridPoints,
                                              double tol = kDefaultTheoremTol) {
  ConditionReport rep;
  if (family.in_domain(0.0)) {
    rep.scaling_checked = true;
    const auto config = ChainConfig::make(n, 0.0);
    const auto model = family.model(n, 0.0);
    for (const auto& pair : config.pairs()) {
      const double pe = model.joint(config, pair).pr_equal();
      rep.scaling_worst = std::min(rep.scaling_worst, pe);
      if (std::abs(pe - 1.0) > tol) {
        rep.scaling_holds = false;
        const bool closing = config.kind(pair) == PairKind::closing;
        rep.failures.push_back(std::string("scaling: Pr(a=b|phi=0) = ") + std::to_string(pe) + " at " +
                               (closing ? "closing pair" : "neighbour pair") + " (A" + std::to_string(pair.a) +
                               ",B" + std::to_string(pair.b) + ")");
      }
    }
  }

  for (double theta : linear_grid(family.theta_lo, family.theta_hi, grid_points)) {
    const auto config = ChainConfig::make(n, theta);
    const auto model = family.model(n, theta);
    for (const auto& pair : config.pairs()) {
      const int offset = (2 * pair.b + 1) - 2 * pair.a;
      const double coef = static_cast<double>(offset) / (2.0 * n);
      const double phi = coef * theta;
      const double mirror_theta = (kPi - phi) / coef;
      if (!family.in_domain(mirror_theta)) continue;
      const auto mirror_config = ChainConfig::make(n, mirror_theta);
      const double lhs = model.joint(config, pair).pr_equal();
      const double rhs = family.model(n, mirror_theta).joint(mirror_config, pair).pr_diff();
      ++rep.symmetry_comparisons;
      if (std::abs(lhs - rhs) > tol) {
        if (rep.symmetry_holds)
          rep.failures.push_back("symmetry: Pr(a=b|" + std::to_string(phi) + ") = " + std::to_string(lhs) +
                                 " but Pr(a!=b|pi-phi) = " + std::to_string(rhs));
        rep.symmetry_holds = false;
      }
    }
  }
  rep.passed = rep.scaling_holds && rep.symmetry_holds;
  return rep;
}

struct SmoothnessReport {
  bool passed = true;
  bool interval_vacuous = true;   // no (Theta1, Theta2) with I(Theta1) > I(Theta2) = 0 on the grid
  bool interval_holds = true;
  std::vector<std::pair<double, double>> interval_counterexamples;  // (Theta, I)
  bool order_vacuous = true;      // premise 1 > I(2,pi) > I(limit,pi) not met
  bool order_holds = true;
  std::vector<std::pair<double, double>> order_counterexamples;     // (N, I(N,pi))
};

/// Grid version of the two smoothness conditions. The interval condition is
/// checked at order `n` over `theta_grid`; the order condition scans N = 2..n_max
/// at Theta = pi and takes I(n_max, pi) as the stand-in for the N -> infinity limit.
inline SmoothnessReport check_smoothness(const CorrelationFamily& family, int n, const std::vector<double>& theta_grid,
                                         int n_max = 50, double tol = kDefaultTheoremTol) {
  SmoothnessReport rep;
  if (!std::is_sorted(theta_grid.begin(), theta_grid.end())) throw InputError("theta grid must be sorted");
  std::vector<double> values;
  values.reserve(theta_grid.size());
  for (double t : theta_grid) {
    if (!family.in_domain(t)) throw InputError("theta grid leaves family domain");
    values.push_back(family.i_value(n, t));
  }

  // Last zero strictly after each index.
  const std::size_t m = values.size();
  std::vector<std::ptrdiff_t> last_zero_after(m, -1);
  std::ptrdiff_t last_zero = -1;
  for (std::size_t k = m; k-- > 0;) {
    last_zero_after[k] = last_zero;
    if (std::abs(values[k]) <= tol && last_zero < 0) last_zero = static_cast<std::ptrdiff_t>(k);
  }
  std::vector<bool> flagged(m, false);
  for (std::size_t i = 0; i < m; ++i) {
    if (!(values[i] > tol) || last_zero_after[i] < 0) continue;
    rep.interval_vacuous = false;
    for (std::size_t j = i + 1; j < static_cast<std::size_t>(last_zero_after[i]); ++j) {
      if (values[j] < values[i] && values[j] > tol) continue;
      rep.interval_holds = false;
      if (!flagged[j]) rep.interval_counterexamples.emplace_back(theta_grid[j], values[j]);
      flagged[j] = true;
    }
  }

  if (family.in_domain(kPi)) {
    std::vector<double> at_pi;
    for (int k = 2; k <= n_max; ++k) at_pi.push_back(family.i_value(k, kPi));
    if (at_pi.front() < 1.0 - tol && at_pi.front() > at_pi.back() + tol) {
      rep.order_vacuous = false;
      for (std::size_t k = 1; k < at_pi.size(); ++k) {
        if (at_pi[k] < at_pi[k - 1]) continue;
        rep.order_holds = false;
        rep.order_counterexamples.emplace_back(static_cast<double>(k + 2), at_pi[k]);
      }
    }
  }
  rep.passed = rep.interval_holds && rep.order_holds;
  return rep;
}

struct TheoremCheckResult {
  bool premise_holds = false;
  bool conclusion_holds = true;  // true when the premise fails (vacuous)
  bool basic_conditions_hold = false;
  bool bell_premise_holds = false;
  std::vector<std::pair<double, double>> counterexamples;  // (Theta or N, observed I)
  std::string note;
};

/// If I(2, pi) = 0 for a family meeting the basic conditions, every interior
/// Theta in (0, pi) must give 0 < I(2, Theta) < 1.
inline TheoremCheckResult check_theorem1(const CorrelationFamily& family, int grid_points = kDefaultGridPoints,
                                         double tol = kDefaultTheoremTol) {
  TheoremCheckResult r;
  r.basic_conditions_hold = check_basic_conditions(family, 2, grid_points, tol).passed;
  if (!family.in_domain(0.0) || !family.in_domain(kPi)) {
    r.note = "family domain does not cover [0, pi]";
    return r;
  }
  const double at_pi = family.i_value(2, kPi);
  r.bell_premise_holds = std::abs(at_pi) <= tol;
  r.premise_holds = r.basic_conditions_hold && r.bell_premise_holds;
  if (!r.bell_premise_holds) {
    r.note = "vacuous: I(2,pi) = " + std::to_string(at_pi) + " is not 0";
    return r;
  }
  if (!r.basic_conditions_hold) {
    r.note = "premise violated: basic conditions fail although I(2,pi) = 0";
    return r;
  }
  const auto grid = linear_grid(0.0, kPi, grid_points);
  for (std::size_t k = 1; k + 1 < grid.size(); ++k) {
    const double i = family.i_value(2, grid[k]);
    if (!(i > tol && i < 1.0 - tol)) r.counterexamples.emplace_back(grid[k], i);
  }
  r.conclusion_holds = r.counterexamples.empty();
  r.note = r.conclusion_holds ? "0 < I(2,Theta) < 1 on the interior grid"
                              : std::to_string(r.counterexamples.size()) + " interior grid points outside (0, 1)";
  return r;
}

/// Default envelope for I(n_max, pi): pi^2 / 8N, the small-angle bound of N(1 - cos(pi/2N)).
inline double default_theorem2_envelope(int n) { return kPi * kPi / (8.0 * n); }

/// If 0 < I(2, pi) < 1, I(N, pi) must decrease strictly for N = 2..n_max and end
/// below `envelope(n_max)`. The premise here is the Bell premise only; the basic
/// conditions are reported but do not gate the check.
inline TheoremCheckResult check_theorem2(const CorrelationFamily& family, int n_max, double tol = kDefaultTheoremTol,
                                         const std::function<double(int)>& envelope = default_theorem2_envelope) {
  TheoremCheckResult r;
  if (n_max < 3) throw InputError("n_max must be >= 3");
  r.basic_conditions_hold = check_basic_conditions(family, 2, 256, tol).passed;
  if (!family.in_domain(kPi)) {
    r.note = "family domain does not contain pi";
    return r;
  }
  const double first = family.i_value(2, kPi);
  r.bell_premise_holds = first > tol && first < 1.0 - tol;
  r.premise_holds = r.bell_premise_holds;
  if (!r.premise_holds) {
    r.note = "vacuous: I(2,pi) = " + std::to_string(first) + " is not strictly inside (0, 1)";
    return r;
  }
  double prev = first;
  double last = first;
  for (int n = 3; n <= n_max; ++n) {
    last = family.i_value(n, kPi);
    if (!(last < prev)) r.counterexamples.emplace_back(static_cast<double>(n), last);
    prev = last;
  }
  const bool under_envelope = last <= envelope(n_max);
  if (!under_envelope && r.counterexamples.empty()) r.counterexamples.emplace_back(static_cast<double>(n_max), last);
  r.conclusion_holds = r.counterexamples.empty();
  r.note = r.conclusion_holds ? "I(N,pi) strictly decreasing up to N = " + std::to_string(n_max)
                              : "I(N,pi) fails to decrease at " + std::to_string(r.counterexamples.size()) + " orders";
  return r;
}

}  // namespace chainbell
