#pragma once

// Domain types for position environments with a common budget, plus the
// cumulative-supply algebra shared by every mechanism in the library.
//
// Conventions: agents are indexed in non-increasing order of value once an
// instance is normalized. Index arguments named `i` in the public API are
// 1-based to match the usual auction notation; containers are 0-based.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pfa {

inline constexpr double kTolerance = 1e-9;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline bool approx_equal(double a, double b, double tol = kTolerance) {
  if (a == b) return true;  // handles matching infinities
  return std::abs(a - b) <= tol;
}

/// Non-increasing service probabilities, one per position.
struct PositionEnvironment {
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }

  bool valid() const {
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!(weights[i] >= 0.0 && weights[i] <= 1.0)) return false;
      if (i > 0 && weights[i] > weights[i - 1]) return false;
    }
    return true;
  }
};

/// Non-increasing values and a common budget (may be +inf).
struct ValuationProfile {
  std::vector<double> values;
  double budget = kInfinity;

  std::size_t size() const { return values.size(); }
};

struct Outcome {
  std::vector<double> alloc;
  std::vector<double> pay;

  Outcome() = default;
  explicit Outcome(std::size_t n) : alloc(n, 0.0), pay(n, 0.0) {}

  std::size_t size() const { return alloc.size(); }

  double revenue() const { return std::accumulate(pay.begin(), pay.end(), 0.0); }

  double welfare(std::span<const double> values) const {
    double w = 0.0;
    for (std::size_t i = 0; i < alloc.size() && i < values.size(); ++i) w += values[i] * alloc[i];
    return w;
  }
};

/// A normalized instance. `order[k]` is the input index of the agent at
/// sorted rank k, so outcomes can be reported back in input order.
struct BudgetedInstance {
  PositionEnvironment env;
  ValuationProfile profile;
  std::vector<std::size_t> order;

  std::size_t size() const { return profile.values.size(); }
  std::span<const double> values() const { return profile.values; }
  std::span<const double> weights() const { return env.weights; }
  double budget() const { return profile.budget; }
};

namespace detail {

inline void check_entries(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + " must be finite");
    if (x < 0.0) throw InvalidInput(std::string(what) + " must be non-negative");
  }
}

}  // namespace detail

/// Sorts values and weights non-increasing (values stably, keeping the index
/// map) and zero-pads the weights to the number of agents.
inline BudgetedInstance normalize(std::span<const double> values, std::span<const double> weights,
                                  double budget) {
  detail::check_entries(values, "values");
  detail::check_entries(weights, "weights");
  if (std::isnan(budget) || budget < 0.0) throw InvalidInput("budget must be non-negative");
  if (std::isinf(budget) && budget < 0.0) throw InvalidInput("budget must be non-negative");
  for (double w : weights) {
    if (w > 1.0) throw InvalidInput("weights must lie in [0, 1]");
  }
  if (weights.size() > values.size()) {
    throw InvalidInput("more position weights than agents");
  }

  const std::size_t n = values.size();
  BudgetedInstance inst;
  inst.order.resize(n);
  std::iota(inst.order.begin(), inst.order.end(), std::size_t{0});
  std::stable_sort(inst.order.begin(), inst.order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

  inst.profile.values.reserve(n);
  for (std::size_t k : inst.order) inst.profile.values.push_back(values[k]);
  inst.profile.budget = budget;

  inst.env.weights.assign(weights.begin(), weights.end());
  std::sort(inst.env.weights.begin(), inst.env.weights.end(), std::greater<>());
  inst.env.weights.resize(n, 0.0);
  return inst;
}

/// Builds an instance from already-sorted data without an input permutation
/// (identity order). Weights are truncated or zero-padded to `values.size()`.
inline BudgetedInstance make_sorted_instance(std::vector<double> values, std::vector<double> weights,
                                             double budget) {
  weights.resize(values.size(), 0.0);
  return normalize(values, weights, budget);
}

/// S_i = sum of the first i weights, returned for i = 1..n.
inline std::vector<double> cumulative_supply(const PositionEnvironment& env) {
  std::vector<double> supply(env.size());
  std::partial_sum(env.weights.begin(), env.weights.end(), supply.begin());
  return supply;
}

/// Average weight of the top i positions.
inline double average_top(const PositionEnvironment& env, std::size_t i) {
  if (i == 0 || i > env.size()) throw std::out_of_range("average_top: index out of range");
  double s = 0.0;
  for (std::size_t j = 0; j < i; ++j) s += env.weights[j];
  return s / static_cast<double>(i);
}

/// Minimum envy-free payment of the top agent when the top i agents are
/// ironed and everyone below gets their own position, ignoring the budget.
/// Non-increasing in i, and zero at i = n.
inline std::vector<double> ironed_top_payments(const BudgetedInstance& inst) {
  const std::size_t n = inst.size();
  const auto v = inst.values();
  const auto phi = inst.weights();
  std::vector<double> out(n, 0.0);
  // tail[i] = sum_{j=i+1}^{n} v_j (phi_{j-1} - phi_j), 1-based j.
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t j = n; j >= 2; --j) {
    tail[j - 1] = tail[j] + v[j - 1] * (phi[j - 2] - phi[j - 1]);
  }
  double prefix = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    prefix += phi[i - 1];
    const double avg = prefix / static_cast<double>(i);
    const double next_value = i < n ? v[i] : 0.0;
    out[i - 1] = next_value * (avg - phi[i - 1]) + tail[i];
  }
  return out;
}

inline double ironed_top_payment(const BudgetedInstance& inst, std::size_t i) {
  if (i == 0 || i > inst.size()) throw std::out_of_range("ironed_top_payment: index out of range");
  return ironed_top_payments(inst)[i - 1];
}

/// Cumulative feasibility: every prefix sum of `alloc` stays within supply.
inline bool is_feasible(const PositionEnvironment& env, std::span<const double> alloc,
                        double tol = kTolerance) {
  double cum_alloc = 0.0;
  double cum_supply = 0.0;
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    if (alloc[i] < -tol || alloc[i] > 1.0 + tol) return false;
    cum_alloc += alloc[i];
    cum_supply += i < env.size() ? env.weights[i] : 0.0;
    if (cum_alloc > cum_supply + tol) return false;
  }
  return true;
}

/// Reorders a sorted-rank outcome back to input order.
inline Outcome to_input_order(const BudgetedInstance& inst, const Outcome& sorted) {
  Outcome out(sorted.size());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const std::size_t idx = k < inst.order.size() ? inst.order[k] : k;
    out.alloc[idx] = sorted.alloc[k];
    out.pay[idx] = sorted.pay[k];
  }
  return out;
}

/// Values in input order.
inline std::vector<double> input_order_values(const BudgetedInstance& inst) {
  std::vector<double> out(inst.size());
  for (std::size_t k = 0; k < inst.size(); ++k) out[inst.order[k]] = inst.profile.values[k];
  return out;
}

/// Sub-instance over a subset of sorted ranks; inherits the environment
/// truncated to the subset's size.
inline BudgetedInstance restrict_to(const BudgetedInstance& inst, std::span<const std::size_t> ranks) {
  std::vector<double> vals;
  vals.reserve(ranks.size());
  for (std::size_t r : ranks) vals.push_back(inst.profile.values[r]);
  std::vector<double> w(inst.env.weights.begin(),
                        inst.env.weights.begin() +
                            static_cast<std::ptrdiff_t>(std::min(ranks.size(), inst.env.size())));
  return normalize(vals, w, inst.budget());
}

}  // namespace pfa
