#pragma once

// Envy-free payments, ironing, and the Lagrangian characterization of the
// welfare- and revenue-optimal envy-free outcomes under a common budget in
// position environments.
//
// The budget enters only through the top agent's payment (envy-free payments
// are monotone in value), so both benchmarks are solved by relaxing
// "p_1 <= B" with a multiplier lambda. For fixed lambda the relaxed problem
// is ironed virtual surplus maximization; its optimal face is explored with
// two tie-breaking arms that bracket p_1, and the optimum mixes the arms so
// p_1 meets the budget with equality.

#include <cassert>
#include <utility>

#include "pfa/core.hpp"

namespace pfa {

// ---------------------------------------------------------------------------
// Envy-free payments

inline bool is_swap_monotone(std::span<const double> alloc, double tol = kTolerance) {
  for (std::size_t i = 1; i < alloc.size(); ++i) {
    if (alloc[i] > alloc[i - 1] + tol) return false;
  }
  return true;
}

/// p_i = sum_{j>i} (x_{j-1} - x_j) v_j
inline std::vector<double> min_payments(std::span<const double> values, std::span<const double> alloc) {
  if (!is_swap_monotone(alloc)) throw InvalidInput("allocation is not swap monotone");
  const std::size_t n = alloc.size();
  std::vector<double> pay(n, 0.0);
  for (std::size_t j = n; j-- > 1;) pay[j - 1] = pay[j] + (alloc[j - 1] - alloc[j]) * values[j];
  return pay;
}

/// p_i = sum_{j>=i} (x_j - x_{j+1}) v_j, with x_{n+1} = 0
inline std::vector<double> max_payments(std::span<const double> values, std::span<const double> alloc) {
  if (!is_swap_monotone(alloc)) throw InvalidInput("allocation is not swap monotone");
  const std::size_t n = alloc.size();
  std::vector<double> pay(n, 0.0);
  double acc = 0.0;
  for (std::size_t j = n; j-- > 0;) {
    const double next = j + 1 < n ? alloc[j + 1] : 0.0;
    acc += (alloc[j] - next) * values[j];
    pay[j] = acc;
  }
  return pay;
}

/// Pairwise no-envy plus individual rationality, with absolute tolerance.
inline bool is_envy_free(std::span<const double> values, const Outcome& outcome, double tol = kTolerance) {
  const std::size_t n = outcome.size();
  if (values.size() != n || outcome.pay.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const double own = values[i] * outcome.alloc[i] - outcome.pay[i];
    if (own < -tol) return false;
    for (std::size_t j = 0; j < n; ++j) {
      if (own < values[i] * outcome.alloc[j] - outcome.pay[j] - tol) return false;
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Lagrangian virtual values and ironing

inline std::vector<double> lagrangian_virtuals_welfare(std::span<const double> values, double lambda) {
  const std::size_t n = values.size();
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double next = i + 1 < n ? values[i + 1] : 0.0;
    phi[i] = i == 0 ? values[0] - lambda * next : values[i] + lambda * (values[i] - next);
  }
  return phi;
}

inline std::vector<double> lagrangian_virtuals_revenue(std::span<const double> values, double lambda) {
  const std::size_t n = values.size();
  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rank = static_cast<double>(i + 1);
    const double prev = i > 0 ? values[i - 1] : 0.0;
    phi[i] = (rank - lambda) * values[i] - (rank - 1.0 - lambda) * prev;
  }
  return phi;
}

/// R(0..n) with R(0) = 0 and R(j) the j-th prefix sum.
inline std::vector<double> prefix_curve(std::span<const double> virtuals) {
  std::vector<double> curve(virtuals.size() + 1, 0.0);
  for (std::size_t i = 0; i < virtuals.size(); ++i) curve[i + 1] = curve[i] + virtuals[i];
  return curve;
}

struct IroningResult {
  double multiplier = 0.0;
  std::vector<double> curve;            // R(0..n)
  std::vector<double> ironed_curve;     // concave majorant of R, R(0..n)
  std::vector<double> virtual_values;   // R(i) - R(i-1), i = 1..n
  std::vector<double> ironed_virtuals;  // left slopes of the ironed curve
  std::vector<std::pair<std::size_t, std::size_t>> intervals;  // 1-based, inclusive
  std::vector<std::size_t> touch_points;  // indices where the ironed curve meets R
};

namespace detail {

/// Vertex indices of the upper concave hull of (xs[k], ys[k]); xs strictly
/// increasing. Collinear points are dropped.
inline std::vector<std::size_t> upper_hull(std::span<const double> xs, std::span<const double> ys) {
  std::vector<std::size_t> hull;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull.back();
      const double cross = (xs[b] - xs[a]) * (ys[k] - ys[a]) - (ys[b] - ys[a]) * (xs[k] - xs[a]);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(k);
  }
  return hull;
}

inline std::vector<std::size_t> lower_hull(std::span<const double> xs, std::span<const double> ys) {
  std::vector<double> neg(ys.begin(), ys.end());
  for (double& y : neg) y = -y;
  return upper_hull(xs, neg);
}

inline bool same_level(double a, double b) {
  return std::abs(a - b) <= 1e-9 * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace detail

/// Least concave function lying on or above every point of R and the origin.
inline IroningResult iron(std::span<const double> curve, double multiplier = 0.0) {
  IroningResult res;
  res.multiplier = multiplier;
  res.curve.assign(curve.begin(), curve.end());
  const std::size_t m = curve.size();
  if (m == 0) return res;

  std::vector<double> xs(m);
  std::vector<double> ys(curve.begin(), curve.end());
  for (std::size_t i = 0; i < m; ++i) xs[i] = static_cast<double>(i);
  ys[0] = std::max(ys[0], 0.0);

  const auto hull = detail::upper_hull(xs, ys);
  res.ironed_curve.assign(m, 0.0);
  for (std::size_t h = 0; h + 1 < hull.size(); ++h) {
    const std::size_t a = hull[h];
    const std::size_t b = hull[h + 1];
    const double slope = (ys[b] - ys[a]) / static_cast<double>(b - a);
    for (std::size_t i = a; i <= b; ++i) res.ironed_curve[i] = ys[a] + slope * static_cast<double>(i - a);
    res.ironed_curve[b] = ys[b];
  }
  if (hull.size() == 1) res.ironed_curve[0] = ys[0];

  double scale = 1.0;
  for (double y : ys) scale = std::max(scale, std::abs(y));
  for (std::size_t i = 0; i < m; ++i) {
    if (res.ironed_curve[i] - ys[i] <= 1e-12 * scale) res.touch_points.push_back(i);
  }
  for (std::size_t t = 0; t + 1 < res.touch_points.size(); ++t) {
    const std::size_t a = res.touch_points[t];
    const std::size_t b = res.touch_points[t + 1];
    if (b > a + 1) res.intervals.emplace_back(a + 1, b);
  }

  res.virtual_values.resize(m - 1);
  res.ironed_virtuals.resize(m - 1);
  for (std::size_t i = 1; i < m; ++i) {
    res.virtual_values[i - 1] = curve[i] - curve[i - 1];
    res.ironed_virtuals[i - 1] = res.ironed_curve[i] - res.ironed_curve[i - 1];
  }
  return res;
}

// ---------------------------------------------------------------------------
// Benchmarks

struct BenchmarkResult {
  Outcome outcome;
  double objective = 0.0;
  double multiplier = 0.0;
  double mix = 1.0;  // weight on the arm with the larger top payment
};

enum class Objective { Welfare, Revenue };

namespace detail {

/// Non-Lagrangian virtual values used to break ties: values themselves for
/// welfare, i v_i - (i-1) v_{i-1} for revenue.
inline std::vector<double> secondary_virtuals(std::span<const double> values, Objective obj) {
  if (obj == Objective::Welfare) return {values.begin(), values.end()};
  return lagrangian_virtuals_revenue(values, 0.0);
}

inline double top_payment(std::span<const double> values, std::span<const double> alloc, Objective obj) {
  const std::size_t n = alloc.size();
  double p = 0.0;
  if (obj == Objective::Welfare) {
    for (std::size_t j = 1; j < n; ++j) p += values[j] * (alloc[j - 1] - alloc[j]);
  } else {
    for (std::size_t j = 0; j < n; ++j) p += values[j] * (alloc[j] - (j + 1 < n ? alloc[j + 1] : 0.0));
  }
  return p;
}

/// One tie-breaking arm for a fixed multiplier. Blocks of the ironing are
/// served at a common probability; consecutive blocks with equal ironed
/// virtual value form a tie group, inside which blocks are merged along the
/// upper (maximize) or lower (minimize) hull of the secondary-virtual curve.
/// A group at ironed virtual value zero may also be cut short, serving only
/// up to the extreme point of that hull.
inline std::vector<double> tie_break_arm(std::span<const double> weights, const IroningResult& ironing,
                                         std::span<const double> secondary, bool maximize) {
  const std::size_t n = weights.size();
  std::vector<double> alloc(n, 0.0);
  const auto& touch = ironing.touch_points;
  if (n == 0 || touch.size() < 2) return alloc;

  const std::size_t blocks = touch.size() - 1;
  std::vector<double> level(blocks);
  double scale = 1.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = touch[b];
    const std::size_t hi = touch[b + 1];
    level[b] = (ironing.ironed_curve[hi] - ironing.ironed_curve[lo]) / static_cast<double>(hi - lo);
    scale = std::max(scale, std::abs(level[b]));
  }
  const double zero_tol = 1e-9 * scale;

  std::vector<double> secondary_prefix(n + 1, 0.0);
  std::vector<double> weight_prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    secondary_prefix[i + 1] = secondary_prefix[i] + secondary[i];
    weight_prefix[i + 1] = weight_prefix[i] + weights[i];
  }
  auto serve_segment = [&](std::size_t lo, std::size_t hi) {
    const double avg = (weight_prefix[hi] - weight_prefix[lo]) / static_cast<double>(hi - lo);
    for (std::size_t i = lo; i < hi; ++i) alloc[i] = avg;
  };

  std::size_t b = 0;
  while (b < blocks) {
    std::size_t e = b + 1;
    while (e < blocks && same_level(level[e], level[b])) ++e;
    const double group_level = level[b];
    if (group_level < -zero_tol) break;  // levels are non-increasing

    std::vector<double> xs{static_cast<double>(touch[b])};
    std::vector<double> ys{0.0};
    for (std::size_t k = b; k < e; ++k) {
      xs.push_back(static_cast<double>(touch[k + 1]));
      ys.push_back(secondary_prefix[touch[k + 1]] - secondary_prefix[touch[b]]);
    }
    const auto hull = maximize ? upper_hull(xs, ys) : lower_hull(xs, ys);

    std::size_t last = hull.size() - 1;
    if (group_level <= zero_tol) {
      last = 0;
      for (std::size_t h = 1; h < hull.size(); ++h) {
        const double y = ys[hull[h]];
        const double best = ys[hull[last]];
        if (maximize ? y >= best - 1e-12 * scale : y < best - 1e-12 * scale) last = h;
      }
    }
    for (std::size_t h = 0; h < last; ++h) {
      serve_segment(static_cast<std::size_t>(xs[hull[h]]), static_cast<std::size_t>(xs[hull[h + 1]]));
    }
    if (group_level <= zero_tol) break;
    b = e;
  }
  return alloc;
}

struct Arm {
  std::vector<double> alloc;
  double top_payment = 0.0;
};

struct ArmPair {
  Arm high;  // larger top payment
  Arm low;
};

inline ArmPair arms_at(std::span<const double> values, std::span<const double> weights, double lambda,
                       Objective obj) {
  const auto virtuals =
      obj == Objective::Welfare ? lagrangian_virtuals_welfare(values, lambda)
                                : lagrangian_virtuals_revenue(values, lambda);
  const auto ironing = iron(prefix_curve(virtuals), lambda);
  const auto secondary = secondary_virtuals(values, obj);
  Arm a{tie_break_arm(weights, ironing, secondary, true), 0.0};
  Arm b{tie_break_arm(weights, ironing, secondary, false), 0.0};
  a.top_payment = top_payment(values, a.alloc, obj);
  b.top_payment = top_payment(values, b.alloc, obj);
  if (a.top_payment < b.top_payment) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

inline BenchmarkResult finish(std::span<const double> values, std::vector<double> alloc, double lambda,
                              double mix, Objective obj) {
  BenchmarkResult res;
  res.multiplier = lambda;
  res.mix = mix;
  res.outcome.pay = obj == Objective::Welfare ? min_payments(values, alloc) : max_payments(values, alloc);
  res.outcome.alloc = std::move(alloc);
  res.objective = obj == Objective::Welfare ? res.outcome.welfare(values) : res.outcome.revenue();
  return res;
}

inline BenchmarkResult mix_arms(std::span<const double> values, const Arm& high, const Arm& low, double budget,
                                double lambda, Objective obj) {
  const double span_p = high.top_payment - low.top_payment;
  double theta = 1.0;
  if (span_p > 0.0) theta = std::clamp((budget - low.top_payment) / span_p, 0.0, 1.0);
  std::vector<double> alloc(high.alloc.size());
  for (std::size_t i = 0; i < alloc.size(); ++i) alloc[i] = theta * high.alloc[i] + (1.0 - theta) * low.alloc[i];
  return finish(values, std::move(alloc), lambda, theta, obj);
}

inline BenchmarkResult solve_benchmark(const BudgetedInstance& inst, Objective obj) {
  const auto values = inst.values();
  const auto weights = inst.weights();
  const double budget = inst.budget();
  if (inst.size() == 0) return {};

  const auto at_zero = arms_at(values, weights, 0.0, obj);
  if (std::isinf(budget)) return finish(values, at_zero.high.alloc, 0.0, 1.0, obj);

  const double slack = 1e-12 * std::max(1.0, budget);
  if (at_zero.high.top_payment <= budget + slack) return finish(values, at_zero.high.alloc, 0.0, 1.0, obj);
  if (at_zero.low.top_payment <= budget + slack) return mix_arms(values, at_zero.high, at_zero.low, budget, 0.0, obj);

  // Bracket: the low arm at lambda_lo is over budget, the low arm at lambda_hi is not.
  double lambda_lo = 0.0;
  double lambda_hi = 1.0;
  ArmPair lo_arms = at_zero;
  ArmPair hi_arms = arms_at(values, weights, lambda_hi, obj);
  for (int it = 0; hi_arms.low.top_payment > budget + slack; ++it) {
    if (it > 200) throw std::runtime_error("budget multiplier bracket did not close");
    lambda_lo = lambda_hi;
    lo_arms = std::move(hi_arms);
    lambda_hi *= 2.0;
    hi_arms = arms_at(values, weights, lambda_hi, obj);
  }

  while (lambda_hi - lambda_lo > 1e-10 * (1.0 + lambda_hi)) {
    const double mid = 0.5 * (lambda_lo + lambda_hi);
    auto mid_arms = arms_at(values, weights, mid, obj);
    if (mid_arms.low.top_payment > budget + slack) {
      lambda_lo = mid;
      lo_arms = std::move(mid_arms);
    } else if (mid_arms.high.top_payment < budget - slack) {
      lambda_hi = mid;
      hi_arms = std::move(mid_arms);
    } else {
      return mix_arms(values, mid_arms.high, mid_arms.low, budget, mid, obj);
    }
  }
  // Both sides of the bracket sit on the optimal face of the limiting
  // multiplier; mixing them meets the budget with equality.
  return mix_arms(values, lo_arms.high, hi_arms.low, budget, 0.5 * (lambda_lo + lambda_hi), obj);
}

}  // namespace detail

/// Welfare-optimal envy-free, individually rational, budget-respecting
/// outcome with minimum envy-free payments.
inline BenchmarkResult efo_welfare(const BudgetedInstance& inst) {
  return detail::solve_benchmark(inst, Objective::Welfare);
}

/// Revenue-optimal envy-free, individually rational, budget-respecting
/// outcome with maximum envy-free payments.
inline BenchmarkResult efo_revenue(const BudgetedInstance& inst) {
  return detail::solve_benchmark(inst, Objective::Revenue);
}

inline double efo_revenue_value(std::vector<double> values, std::vector<double> weights, double budget) {
  return efo_revenue(make_sorted_instance(std::move(values), std::move(weights), budget)).objective;
}

/// Revenue benchmark with the top value replaced by the second highest.
inline double efo2_revenue(const BudgetedInstance& inst) {
  if (inst.size() < 2) throw InvalidInput("efo2_revenue needs at least two agents");
  std::vector<double> v(inst.profile.values);
  v[0] = v[1];
  return efo_revenue_value(std::move(v), inst.env.weights, inst.budget());
}

}  // namespace pfa
