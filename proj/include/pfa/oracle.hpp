#pragma once

// Independent reference implementations used to cross-check the library:
// a dense simplex solver with envy-free LP formulations of both benchmarks,
// a discretized clinching clock on a general polymatroid formulation, and a
// brute-force envy check. Nothing here calls into envyfree.hpp or
// clinching.hpp.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pfa/core.hpp"

namespace pfa::oracle {

// ---------------------------------------------------------------------------
// Linear programming

enum class Sense { LessEq, GreaterEq, Equal };
enum class LpStatus { Optimal, Infeasible, Unbounded };

/// maximize c.x subject to rows, x >= 0
struct LinearProgram {
  std::size_t num_vars = 0;
  std::vector<double> objective;
  std::vector<std::vector<double>> rows;
  std::vector<Sense> senses;
  std::vector<double> rhs;

  explicit LinearProgram(std::size_t n = 0) : num_vars(n), objective(n, 0.0) {}

  void add_row(std::vector<double> coeffs, Sense sense, double b) {
    coeffs.resize(num_vars, 0.0);
    rows.push_back(std::move(coeffs));
    senses.push_back(sense);
    rhs.push_back(b);
  }
};

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  double value = 0.0;
  std::vector<double> x;
};

namespace detail {

inline constexpr long double kPivotTol = 1e-9L;

/// Row m of the tableau holds reduced costs for the current objective.
class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols)
      : m_(rows), n_(cols), t_(rows + 1, std::vector<long double>(cols + 1, 0.0L)) {}

  long double& at(std::size_t r, std::size_t c) { return t_[r][c]; }
  long double& rhs(std::size_t r) { return t_[r][n_]; }
  std::vector<std::size_t> basis;

  void pivot(std::size_t r, std::size_t c) {
    const long double p = t_[r][c];
    for (long double& x : t_[r]) x /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const long double f = t_[i][c];
      if (f == 0.0L) continue;
      for (std::size_t j = 0; j <= n_; ++j) t_[i][j] -= f * t_[r][j];
      t_[i][c] = 0.0L;
    }
    basis[r] = c;
  }

  void set_objective(const std::vector<double>& cost) {
    for (std::size_t j = 0; j <= n_; ++j) {
      long double reduced = j < n_ ? cost[j] : 0.0L;
      for (std::size_t i = 0; i < m_; ++i) reduced -= cost[basis[i]] * t_[i][j];
      t_[m_][j] = reduced;
    }
  }

  /// Dantzig pricing, falling back to Bland's rule after a run of
  /// degenerate pivots. Returns false when unbounded.
  bool optimize(const std::vector<bool>& allowed, double eps) {
    std::size_t degenerate_run = 0;
    for (std::size_t iter = 0; iter < 200000; ++iter) {
      const bool bland = degenerate_run > 50;
      std::size_t enter = n_;
      long double best_reduced = eps;
      for (std::size_t j = 0; j < n_; ++j) {
        if (!allowed[j] || t_[m_][j] <= best_reduced) continue;
        enter = j;
        if (bland) break;
        best_reduced = t_[m_][j];
      }
      if (enter == n_) return true;
      std::size_t leave = m_;
      long double best = std::numeric_limits<long double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const long double a = t_[i][enter];
        if (a <= kPivotTol) continue;
        const long double ratio = t_[i][n_] / a;
        const long double slack = 1e-12L * (1.0L + std::abs(best));
        bool take = leave == m_ || ratio < best - slack;
        if (!take && ratio <= best + slack) {
          take = bland ? basis[i] < basis[leave] : a > t_[leave][enter];
        }
        if (take) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave == m_) return false;
      degenerate_run = best <= 1e-12L ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
    throw std::runtime_error("simplex iteration limit");
  }

  /// Objective value of the current basis for `cost`.
  double value(const std::vector<double>& cost) {
    long double v = 0.0L;
    for (std::size_t i = 0; i < m_; ++i) v += cost[basis[i]] * t_[i][n_];
    return static_cast<double>(v);
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<std::vector<long double>> t_;
};

}  // namespace detail

/// Two-phase dense tableau simplex.
inline LpSolution solve_lp(const LinearProgram& lp, double eps = 1e-10) {
  const std::size_t m = lp.rows.size();
  const std::size_t nv = lp.num_vars;

  std::vector<std::vector<double>> a = lp.rows;
  std::vector<Sense> sense = lp.senses;
  std::vector<double> b = lp.rhs;
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < 0.0 || (b[i] == 0.0 && sense[i] == Sense::GreaterEq)) {
      for (double& x : a[i]) x = -x;
      b[i] = -b[i];
      if (sense[i] == Sense::LessEq) {
        sense[i] = Sense::GreaterEq;
      } else if (sense[i] == Sense::GreaterEq) {
        sense[i] = Sense::LessEq;
      }
    }
  }

  std::size_t slacks = 0;
  std::size_t artificials = 0;
  for (Sense s : sense) {
    if (s != Sense::Equal) ++slacks;
    if (s != Sense::LessEq) ++artificials;
  }
  const std::size_t cols = nv + slacks + artificials;
  detail::Tableau tab(m, cols);
  tab.basis.assign(m, 0);
  std::vector<bool> is_artificial(cols, false);

  std::size_t s_col = nv;
  std::size_t a_col = nv + slacks;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < nv; ++j) tab.at(i, j) = a[i][j];
    tab.rhs(i) = b[i];
    if (sense[i] == Sense::LessEq) {
      tab.at(i, s_col) = 1.0;
      tab.basis[i] = s_col++;
    } else {
      if (sense[i] == Sense::GreaterEq) tab.at(i, s_col++) = -1.0;
      tab.at(i, a_col) = 1.0;
      is_artificial[a_col] = true;
      tab.basis[i] = a_col++;
    }
  }

  LpSolution sol;
  std::vector<bool> all(cols, true);
  if (artificials > 0) {
    std::vector<double> phase1(cols, 0.0);
    for (std::size_t j = 0; j < cols; ++j) {
      if (is_artificial[j]) phase1[j] = -1.0;
    }
    tab.set_objective(phase1);
    tab.optimize(all, eps);
    if (tab.value(phase1) < -1e-7) {
      sol.status = LpStatus::Infeasible;
      return sol;
    }
    for (std::size_t i = 0; i < m; ++i) {
      if (!is_artificial[tab.basis[i]]) continue;
      for (std::size_t j = 0; j < cols; ++j) {
        if (!is_artificial[j] && std::abs(tab.at(i, j)) > detail::kPivotTol) {
          tab.pivot(i, j);
          break;
        }
      }
    }
  }

  std::vector<double> cost(cols, 0.0);
  for (std::size_t j = 0; j < nv; ++j) cost[j] = lp.objective[j];
  std::vector<bool> allowed(cols, true);
  for (std::size_t j = 0; j < cols; ++j) allowed[j] = !is_artificial[j];
  tab.set_objective(cost);
  if (!tab.optimize(allowed, eps)) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }
  sol.status = LpStatus::Optimal;
  sol.x.assign(nv, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basis[i] < nv) sol.x[tab.basis[i]] = static_cast<double>(tab.rhs(i));
  }
  sol.value = 0.0;
  for (std::size_t j = 0; j < nv; ++j) sol.value += lp.objective[j] * sol.x[j];
  return sol;
}

// ---------------------------------------------------------------------------
// Benchmarks as explicit LPs over (x, p): pairwise no-envy, individual
// rationality, the common budget, sorted allocation and cumulative supply.

struct LpBenchmark {
  LpStatus status = LpStatus::Infeasible;
  double objective = 0.0;
  std::vector<double> alloc;
  std::vector<double> pay;
};

namespace detail {

inline LinearProgram envy_free_polytope(std::span<const double> values, std::span<const double> weights,
                                        double budget) {
  const std::size_t n = values.size();
  LinearProgram lp(2 * n);
  auto x = [](std::size_t i) { return i; };
  auto p = [n](std::size_t i) { return n + i; };
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> ir(2 * n, 0.0);
    ir[x(i)] = values[i];
    ir[p(i)] = -1.0;
    lp.add_row(ir, Sense::GreaterEq, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      std::vector<double> ef(2 * n, 0.0);
      ef[x(i)] = values[i];
      ef[p(i)] = -1.0;
      ef[x(j)] -= values[i];
      ef[p(j)] += 1.0;
      lp.add_row(ef, Sense::GreaterEq, 0.0);
    }
    if (std::isfinite(budget)) {
      std::vector<double> cap(2 * n, 0.0);
      cap[p(i)] = 1.0;
      lp.add_row(cap, Sense::LessEq, budget);
    }
  }
  double supply = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n) {
      std::vector<double> mono(2 * n, 0.0);
      mono[x(i + 1)] = 1.0;
      mono[x(i)] = -1.0;
      lp.add_row(mono, Sense::LessEq, 0.0);
    }
    supply += i < weights.size() ? weights[i] : 0.0;
    std::vector<double> prefix(2 * n, 0.0);
    for (std::size_t j = 0; j <= i; ++j) prefix[x(j)] = 1.0;
    lp.add_row(prefix, Sense::LessEq, supply);
  }
  return lp;
}

inline LpBenchmark solve_benchmark_lp(LinearProgram lp, std::size_t n) {
  const LpSolution sol = solve_lp(lp);
  LpBenchmark out;
  out.status = sol.status;
  if (sol.status != LpStatus::Optimal) return out;
  out.objective = sol.value;
  out.alloc.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(n));
  out.pay.assign(sol.x.begin() + static_cast<std::ptrdiff_t>(n), sol.x.end());
  return out;
}

}  // namespace detail

inline constexpr std::size_t kMaxLpAgents = 16;

inline void check_lp_size(std::size_t n) {
  if (n > kMaxLpAgents) throw InvalidInput("LP oracle supports at most 16 agents");
}

/// Welfare over allocations only: sorted allocation, cumulative supply and
/// the top agent's minimum envy-free payment within budget. `values`
/// sorted non-increasing.
inline LpBenchmark lp_efo_welfare(std::span<const double> values, std::span<const double> weights, double budget) {
  const std::size_t n = values.size();
  check_lp_size(n);
  LinearProgram lp(n);
  for (std::size_t i = 0; i < n; ++i) lp.objective[i] = values[i];
  double supply = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n) {
      std::vector<double> mono(n, 0.0);
      mono[i + 1] = 1.0;
      mono[i] = -1.0;
      lp.add_row(mono, Sense::LessEq, 0.0);
    }
    supply += i < weights.size() ? weights[i] : 0.0;
    std::vector<double> prefix(n, 0.0);
    for (std::size_t j = 0; j <= i; ++j) prefix[j] = 1.0;
    lp.add_row(prefix, Sense::LessEq, supply);
  }
  if (std::isfinite(budget) && n >= 2) {
    // sum_{j>=2} v_j (x_{j-1} - x_j) <= B
    std::vector<double> top(n, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
      top[j - 1] += values[j];
      top[j] -= values[j];
    }
    lp.add_row(top, Sense::LessEq, budget);
  }
  const LpSolution sol = solve_lp(lp);
  LpBenchmark out;
  out.status = sol.status;
  if (sol.status != LpStatus::Optimal) return out;
  out.objective = sol.value;
  out.alloc = sol.x;
  out.pay.assign(n, 0.0);
  for (std::size_t i = n; i-- > 1;) out.pay[i - 1] = out.pay[i] + values[i] * (out.alloc[i - 1] - out.alloc[i]);
  return out;
}

/// Revenue over (x, p) with explicit pairwise no-envy constraints.
inline LpBenchmark lp_efo_revenue(std::span<const double> values, std::span<const double> weights, double budget) {
  check_lp_size(values.size());
  auto lp = detail::envy_free_polytope(values, weights, budget);
  for (std::size_t i = 0; i < values.size(); ++i) lp.objective[values.size() + i] = 1.0;
  return detail::solve_benchmark_lp(std::move(lp), values.size());
}

inline LpBenchmark lp_efo_welfare(const BudgetedInstance& inst) {
  return lp_efo_welfare(inst.values(), inst.weights(), inst.budget());
}

inline LpBenchmark lp_efo_revenue(const BudgetedInstance& inst) {
  return lp_efo_revenue(inst.values(), inst.weights(), inst.budget());
}

// ---------------------------------------------------------------------------
// Discretized clinching clock.
//
// The environment is the polymatroid f(T) = S_|T|. At price p every agent
// has cap u_j = c_j + b_j / p (allocation so far plus remaining demand);
// agents that have dropped out are capped at c_j. Agent i's guaranteed
// allocation is the rank of the capped polymatroid with i uncapped minus
// the most the others can take while i keeps c_i.

namespace detail {

/// max { y(N) : y in P(f), y <= caps }
inline double capped_rank(std::span<const double> supply, std::vector<double> caps) {
  std::sort(caps.begin(), caps.end());
  const std::size_t n = caps.size();
  // min over k of S_k + (sum of the n-k smallest caps)
  std::vector<double> small(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) small[j + 1] = small[j] + caps[j];
  double best = small[n];
  for (std::size_t k = 1; k <= n; ++k) best = std::min(best, supply[k - 1] + small[n - k]);
  return best;
}

}  // namespace detail

struct ClockResult {
  Outcome outcome;
  std::size_t ticks = 0;
};

/// Ticks at multiples of `step`; drop-outs happen exactly at each value,
/// one agent at a time from the bottom when values tie.
/// `values` sorted non-increasing.
inline ClockResult simulate_clock(std::span<const double> values, std::span<const double> weights, double budget,
                                  double step) {
  if (!(step > 0.0)) throw InvalidInput("clock step must be positive");
  const std::size_t n = values.size();
  std::vector<double> supply(n, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += i < weights.size() ? weights[i] : 0.0;
    supply[i] = acc;
  }

  ClockResult res;
  res.outcome = Outcome(n);
  std::vector<double> remaining(n, budget);
  std::vector<bool> active(n, true);
  const double inf = std::numeric_limits<double>::infinity();

  auto clinch_at = [&](double price) {
    std::vector<double> caps(n);
    for (std::size_t j = 0; j < n; ++j) {
      double demand = 0.0;
      if (active[j]) demand = (price == 0.0 || std::isinf(remaining[j])) ? inf : remaining[j] / price;
      if (remaining[j] <= 0.0) demand = 0.0;
      caps[j] = res.outcome.alloc[j] + demand;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!active[i] || remaining[i] <= 0.0) continue;
      auto open = caps;
      open[i] = inf;
      auto held = caps;
      held[i] = res.outcome.alloc[i];
      const double guaranteed =
          detail::capped_rank(supply, open) - (detail::capped_rank(supply, held) - res.outcome.alloc[i]);
      double gain = guaranteed - res.outcome.alloc[i];
      if (gain <= 0.0) continue;
      if (price > 0.0 && std::isfinite(remaining[i])) gain = std::min(gain, remaining[i] / price);
      res.outcome.alloc[i] += gain;
      res.outcome.pay[i] += price * gain;
      if (std::isfinite(remaining[i])) remaining[i] = std::max(0.0, remaining[i] - price * gain);
    }
  };

  double price = 0.0;
  std::size_t tick = 0;
  clinch_at(0.0);
  while (true) {
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) any = any || active[j];
    if (!any) break;
    double lowest = inf;
    for (std::size_t j = 0; j < n; ++j) {
      if (active[j]) lowest = std::min(lowest, values[j]);
    }
    const double next_tick = static_cast<double>(tick + 1) * step;
    if (lowest <= next_tick) {
      price = lowest;
      for (std::size_t j = n; j-- > 0;) {
        if (active[j] && values[j] <= price) {
          active[j] = false;
          break;
        }
      }
    } else {
      price = next_tick;
      ++tick;
    }
    clinch_at(price);
    ++res.ticks;
  }
  return res;
}

inline ClockResult simulate_clock(const BudgetedInstance& inst, double step) {
  return simulate_clock(inst.values(), inst.weights(), inst.budget(), step);
}

// ---------------------------------------------------------------------------

/// Every (i, j) such that agent i strictly prefers j's bundle, with (i, i)
/// marking a violation of individual rationality.
inline std::vector<std::pair<std::size_t, std::size_t>> exhaustive_envy_check(std::span<const double> values,
                                                                           const Outcome& outcome,
                                                                           double tol = 1e-9) {
  std::vector<std::pair<std::size_t, std::size_t>> found;
  const std::size_t n = values.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double mine = values[i] * outcome.alloc[i] - outcome.pay[i];
    if (mine < -tol) found.emplace_back(i, i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && values[i] * outcome.alloc[j] - outcome.pay[j] > mine + tol) found.emplace_back(i, j);
    }
  }
  return found;
}

}  // namespace pfa::oracle
