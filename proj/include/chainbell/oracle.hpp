#pragma once

// Exhaustive search over deterministic local strategies for the chained
// functional. Every term is 0 or 1 for such a strategy, and the closing
// constraint cannot be met together with all neighbour constraints, so the
// local minimum is 1.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <thread>
#include <vector>

#include "chainbell/correlations.hpp"
#include "chainbell/functional.hpp"

namespace chainbell {

inline constexpr int kMaxEnumerationOrder = 12;

/// Bit j of `a_bits` (`b_bits`) set means setting j on that side answers -1.
inline LocalStrategy strategy_from_bits(int n, std::uint32_t a_bits, std::uint32_t b_bits) {
  LocalStrategy s;
  s.a_outcomes.reserve(n);
  s.b_outcomes.reserve(n);
  for (int j = 0; j < n; ++j) {
    s.a_outcomes.push_back((a_bits >> j) & 1u ? Outcome::minus : Outcome::plus);
    s.b_outcomes.push_back((b_bits >> j) & 1u ? Outcome::minus : Outcome::plus);
  }
  return s;
}

/// All 4^N deterministic strategies, indexed by (a_bits << N) | b_bits.
class StrategyRange {
 public:
  explicit StrategyRange(int n) : n_(n) {
    if (n < 2) throw InputError("chain order must be >= 2");
    if (n > kMaxEnumerationOrder)
      throw CapacityError("exhaustive enumeration is capped at N = " + std::to_string(kMaxEnumerationOrder));
  }

  class iterator {
   public:
    using value_type = LocalStrategy;
    using difference_type = std::ptrdiff_t;
    iterator() = default;
    iterator(int n, std::uint64_t index) : n_(n), index_(index) {}
    LocalStrategy operator*() const {
      const std::uint32_t mask = (1u << n_) - 1u;
      return strategy_from_bits(n_, static_cast<std::uint32_t>(index_ >> n_) & mask,
                                static_cast<std::uint32_t>(index_) & mask);
    }
    iterator& operator++() { ++index_; return *this; }
    iterator operator++(int) { auto t = *this; ++index_; return t; }
    bool operator==(const iterator& o) const { return index_ == o.index_; }
    std::uint64_t index() const { return index_; }

   private:
    int n_ = 0;
    std::uint64_t index_ = 0;
  };

  iterator begin() const { return {n_, 0}; }
  iterator end() const { return {n_, size()}; }
  std::uint64_t size() const { return std::uint64_t{1} << (2 * n_); }

 private:
  int n_;
};

inline StrategyRange enumerate_strategies(int n) { return StrategyRange(n); }

/// Integer functional value of a bit-encoded strategy.
inline int local_functional_bits(int n, std::uint32_t a_bits, std::uint32_t b_bits) {
  const std::uint32_t mask = (1u << n) - 1u;
  // Neighbours (A_j, B_j) and (B_j, A_{j+1}).
  int diffs = std::popcount((a_bits ^ b_bits) & mask);
  diffs += std::popcount(((a_bits >> 1) ^ b_bits) & (mask >> 1));
  const int closing_equal = ((a_bits & 1u) == ((b_bits >> (n - 1)) & 1u)) ? 1 : 0;
  return closing_equal + diffs;
}

struct LhvMinimum {
  double min_i = 0.0;
  LocalStrategy witness;
  bool analytic = false;  // enumeration skipped above the cap
};

/// Minimum of the functional over deterministic strategies. Theta is accepted for
/// interface symmetry only; local terms do not depend on it. Above the
/// enumeration cap the parity bound is returned with `analytic` set.
inline LhvMinimum lhv_minimum(int n, double theta = kPi, unsigned workers = 0) {
  (void)theta;
  if (n < 2) throw InputError("chain order must be >= 2");
  if (n > kMaxEnumerationOrder) return {1.0, uniform_strategy(n), true};

  const std::uint64_t total = std::uint64_t{1} << (2 * n);
  const std::uint32_t mask = (1u << n) - 1u;
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, total));

  struct Best {
    int value = std::numeric_limits<int>::max();
    std::uint64_t index = 0;
  };
  std::vector<Best> best(workers);
  auto scan = [&](unsigned w) {
    const std::uint64_t lo = total * w / workers, hi = total * (w + 1) / workers;
    Best b;
    for (std::uint64_t idx = lo; idx < hi; ++idx) {
      const int v = local_functional_bits(n, static_cast<std::uint32_t>(idx >> n) & mask,
                                          static_cast<std::uint32_t>(idx) & mask);
      if (v < b.value) b = {v, idx};
    }
    best[w] = b;
  };
  if (workers == 1) {
    scan(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(scan, w);
  }
  // Ranges are ordered, so the first strict minimum is the lowest index overall.
  Best overall;
  for (const auto& b : best)
    if (b.value < overall.value) overall = b;
  return {static_cast<double>(overall.value),
          strategy_from_bits(n, static_cast<std::uint32_t>(overall.index >> n) & mask,
                             static_cast<std::uint32_t>(overall.index) & mask),
          false};
}

/// Positive when the quantum prediction undercuts the local bound.
inline double violation_margin(int n, double theta, double v) {
  return lhv_minimum(n, theta).min_i - i_quantum_closed_form(n, theta, v);
}

}  // namespace chainbell
