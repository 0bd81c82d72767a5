#pragma once

// Budgeted clinching auction for position environments.
//
// While i agents remain on the clock they are symmetric: the same residual
// cumulative supplies S'_1..S'_i, the same remaining budget B', and the
// same clinched amount so far. run_clock executes the ascending clock
// event by event; closed_form computes the same outcome directly from the
// ironed top payments B_1..B_n.

#include <string>

#include "pfa/core.hpp"
#include "pfa/envyfree.hpp"

namespace pfa {

enum class ClinchKind { DropOut, DemandBind, GradualPhase, FinalSplit };

inline const char* to_string(ClinchKind k) {
  switch (k) {
    case ClinchKind::DropOut: return "drop-out";
    case ClinchKind::DemandBind: return "demand-bind";
    case ClinchKind::GradualPhase: return "gradual-phase";
    case ClinchKind::FinalSplit: return "final-split";
  }
  return "?";
}

struct ClinchEvent {
  double price = 0.0;        // clock price at which the event completes
  double price_start = 0.0;  // equals price except for gradual phases
  std::size_t active = 0;
  double per_agent_clinch = 0.0;
  double per_agent_payment = 0.0;
  ClinchKind kind = ClinchKind::DropOut;
};

struct ClinchingTrace {
  std::vector<ClinchEvent> events;
};

struct ClinchingStructure {
  std::size_t k = 0;
  double delta = 0.0;
  double phase2_start = 0.0;
};

/// Symmetric clock state for the active prefix.
struct ClockState {
  std::vector<double> supply;  // residual S'_1..S'_n, 0-based
  double budget = kInfinity;
  std::size_t active = 0;
};

struct ClinchAmount {
  double per_agent = 0.0;
  double payment = 0.0;
};

/// One instantaneous clinch at `price`: each active agent clinches
/// D_i - D_{i-1} with D_j = min(S'_j, j B' / price).
inline ClinchAmount clinch_step(ClockState& s, double price) {
  const std::size_t i = s.active;
  if (i == 0) return {};
  if (s.budget <= 0.0) return {};
  if (price < 0.0) throw InvalidInput("clinch_step: negative price");
  if (price == 0.0 && std::isfinite(s.budget)) throw InvalidInput("clinch_step: zero price with positive demand");

  auto demand = [&](std::size_t j) -> double {
    if (j == 0) return 0.0;
    if (std::isinf(s.budget) || price == 0.0) return s.supply[j - 1];
    return std::min(s.supply[j - 1], static_cast<double>(j) * s.budget / price);
  };
  double delta = std::max(0.0, demand(i) - demand(i - 1));
  ClinchAmount out;
  if (std::isfinite(s.budget)) {
    delta = std::min(delta, s.budget / price);
    out.payment = std::min(s.budget, price * delta);
    s.budget -= out.payment;
  } else {
    out.payment = price * delta;
  }
  out.per_agent = delta;
  for (std::size_t j = 1; j <= i; ++j) s.supply[j - 1] -= static_cast<double>(j) * delta;
  return out;
}

struct GradualResult {
  double per_agent_clinch = 0.0;
  double per_agent_payment = 0.0;
  double remaining_supply = 0.0;
};

/// Continuous clinching of i agents holding supply S between prices p_start
/// and p_end, entered with (i-1) B' = p_start S.
inline GradualResult gradual_phase(double supply, std::size_t i, double p_start, double p_end) {
  if (p_start > p_end) throw InvalidInput("gradual_phase: p_start > p_end");
  if (i == 0 || !(p_start > 0.0)) throw InvalidInput("gradual_phase: needs i >= 1 and p_start > 0");
  const double k = static_cast<double>(i);
  const double ratio = std::pow(p_start / p_end, k);
  GradualResult r;
  r.per_agent_clinch = supply / k * (1.0 - ratio);
  r.remaining_supply = supply * ratio;
  if (i == 1) {
    r.per_agent_payment = supply * p_start * std::log(p_end / p_start);
  } else {
    // S p_s^i (p_e^{1-i} - p_s^{1-i}) / (1-i), written to avoid large powers
    r.per_agent_payment = supply * p_start * (std::pow(p_start / p_end, k - 1.0) - 1.0) / (1.0 - k);
  }
  return r;
}

struct ClockRun {
  Outcome outcome;
  ClinchingTrace trace;
};

/// Exact event-driven clock. Agents sharing a value drop one at a time,
/// lowest rank first.
inline ClockRun run_clock(const BudgetedInstance& inst) {
  const std::size_t n = inst.size();
  const auto v = inst.values();
  ClockRun run;
  run.outcome = Outcome(n);
  if (n == 0) return run;

  ClockState s;
  s.supply = cumulative_supply(inst.env);
  s.budget = inst.budget();
  s.active = n;
  const double budget_eps = 1e-12 * (std::isfinite(inst.budget()) ? std::max(1.0, inst.budget()) : 1.0);

  auto credit = [&](double clinch, double payment) {
    for (std::size_t j = 0; j < s.active; ++j) {
      run.outcome.alloc[j] += clinch;
      run.outcome.pay[j] += payment;
    }
  };
  auto record = [&](double p0, double p1, double clinch, double payment, ClinchKind kind) {
    if (clinch <= 0.0) return;
    run.trace.events.push_back({p1, p0, s.active, clinch, payment, kind});
  };
  auto exhausted = [&] { return std::isfinite(s.budget) && s.budget <= budget_eps; };

  if (inst.budget() <= 0.0) return run;

  // At price zero demand is unbounded, so the active bottom position is
  // uncontested and taken for free.
  auto free_clinch = [&] {
    const std::size_t a = s.active;
    const double delta = s.supply[a - 1] - (a >= 2 ? s.supply[a - 2] : 0.0);
    if (delta <= 0.0) return;
    for (std::size_t j = 1; j <= a; ++j) s.supply[j - 1] -= static_cast<double>(j) * delta;
    credit(delta, 0.0);
    record(0.0, 0.0, delta, 0.0, ClinchKind::DropOut);
  };
  free_clinch();

  double price = 0.0;
  while (s.active > 0 && !exhausted()) {
    const std::size_t i = s.active;
    const double drop = v[i - 1];

    if (i >= 2 && std::isfinite(s.budget)) {
      const double s_prev = std::min(s.supply[i - 2], s.supply[i - 1]);
      if (s_prev > 0.0) {
        const double bind = static_cast<double>(i - 1) * s.budget / s_prev;
        const double start = std::max(price, bind);
        if (start < drop) {
          const auto g = gradual_phase(s.supply[i - 1], i, start, drop);
          for (std::size_t j = 1; j <= i; ++j) s.supply[j - 1] -= static_cast<double>(j) * g.per_agent_clinch;
          s.budget = std::max(0.0, s.budget - g.per_agent_payment);
          credit(g.per_agent_clinch, g.per_agent_payment);
          record(start, drop, g.per_agent_clinch, g.per_agent_payment, ClinchKind::GradualPhase);
        }
      }
    }

    price = std::max(price, drop);
    s.active = i - 1;
    if (s.active == 0 || exhausted()) break;

    const std::size_t a = s.active;
    const bool demand_binds = std::isfinite(s.budget) && a >= 2 && price > 0.0 &&
                              static_cast<double>(a - 1) * s.budget / price < s.supply[a - 2];
    if (price == 0.0) {
      free_clinch();
      continue;
    }
    const auto c = clinch_step(s, price);
    credit(c.per_agent, c.payment);
    ClinchKind kind = demand_binds ? ClinchKind::DemandBind : ClinchKind::DropOut;
    if (exhausted()) kind = ClinchKind::FinalSplit;
    record(price, price, c.per_agent, c.payment, kind);
  }

  if (std::isfinite(inst.budget())) {
    for (double& p : run.outcome.pay) p = std::min(p, inst.budget());
  }
  return run;
}

namespace detail {

/// Smallest 1-based k with B_k < B; 0 when B = 0.
inline std::size_t clinching_pivot(const BudgetedInstance& inst, std::span<const double> tops) {
  if (inst.budget() <= 0.0) return 0;
  for (std::size_t k = 1; k <= tops.size(); ++k) {
    if (tops[k - 1] < inst.budget()) return k;
  }
  return tops.size();
}

}  // namespace detail

struct ClosedFormResult {
  Outcome outcome;
  ClinchingStructure structure;
};

/// Direct clinching outcome: agents below k keep their own position, the
/// top k share the rest, and the top k-1 exhaust the budget.
inline ClosedFormResult closed_form(const BudgetedInstance& inst) {
  const std::size_t n = inst.size();
  const auto v = inst.values();
  const auto phi = inst.weights();
  const double budget = inst.budget();
  ClosedFormResult res;
  res.outcome = Outcome(n);
  if (n == 0 || budget <= 0.0) return res;

  // tail[i] = sum_{j>i} v_j (phi_{j-1} - phi_j), 1-based
  std::vector<double> tail(n + 1, 0.0);
  for (std::size_t j = n; j >= 2; --j) tail[j - 1] = tail[j] + v[j - 1] * (phi[j - 2] - phi[j - 1]);

  const auto tops = ironed_top_payments(inst);
  const std::size_t k = detail::clinching_pivot(inst, tops);
  res.structure.k = k;

  for (std::size_t i = k + 1; i <= n; ++i) {
    res.outcome.alloc[i - 1] = phi[i - 1];
    res.outcome.pay[i - 1] = tail[i];
  }
  if (k == 1) {
    res.outcome.alloc[0] = phi[0];
    res.outcome.pay[0] = tail[1];
    res.structure.phase2_start = n >= 2 ? v[1] : 0.0;
    return res;
  }

  const double kk = static_cast<double>(k);
  const double b1 = budget - tail[k];
  double s_prefix = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) s_prefix += phi[j];
  const double s1 = s_prefix - (kk - 1.0) * phi[k - 1];
  const double v_next = k < n ? v[k] : 0.0;

  double extra = 0.0;
  double b2 = b1;
  double s2 = s1;
  double p2 = 0.0;
  if (v_next > 0.0 && (kk - 1.0) * b1 / v_next < s1) {
    extra = s1 - (kk - 1.0) * b1 / v_next;
    b2 = kk * b1 - s1 * v_next;
    s2 = (kk - 1.0) * b2 / v_next;
    p2 = v_next;
  } else {
    p2 = (kk - 1.0) * b1 / s1;
  }
  p2 = std::min(p2, v[k - 1]);
  res.structure.phase2_start = p2;

  GradualResult g;
  g.remaining_supply = s2;
  if (p2 > 0.0 && p2 < v[k - 1]) g = gradual_phase(s2, k, p2, v[k - 1]);
  const double b3 = b2 - g.per_agent_payment;
  const double delta = g.remaining_supply / (kk - 1.0);
  res.structure.delta = delta;

  const double base = phi[k - 1] + extra + g.per_agent_clinch;
  for (std::size_t i = 1; i < k; ++i) {
    res.outcome.alloc[i - 1] = base + delta;
    res.outcome.pay[i - 1] = budget;
  }
  res.outcome.alloc[k - 1] = base;
  res.outcome.pay[k - 1] = std::min(budget, budget - b3);
  return res;
}

/// Lists violations of the clinching structure: the top k-1 agents share
/// one allocation and pay B, agent k gets at least phi_k, agents below k
/// get exactly their own position, and the outcome is envy free.
inline std::vector<std::string> structure_check(const BudgetedInstance& inst, const Outcome& out,
                                                double tol = 1e-7) {
  std::vector<std::string> problems;
  const std::size_t n = inst.size();
  if (out.size() != n || out.pay.size() != n) {
    problems.emplace_back("outcome size does not match instance");
    return problems;
  }
  const auto v = inst.values();
  const auto phi = inst.weights();
  const double budget = inst.budget();
  const std::size_t k = detail::clinching_pivot(inst, ironed_top_payments(inst));
  auto at = [](std::size_t i) { return "agent " + std::to_string(i); };

  if (k == 0) {
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(out.alloc[i]) > tol || std::abs(out.pay[i]) > tol) {
        problems.push_back(at(i + 1) + ": nonzero with no budget");
      }
    }
    return problems;
  }

  for (std::size_t i = 1; i < k; ++i) {
    if (std::abs(out.alloc[i - 1] - out.alloc[0]) > tol) problems.push_back(at(i) + ": top allocations differ");
    if (std::abs(out.pay[i - 1] - budget) > tol) problems.push_back(at(i) + ": does not pay the budget");
  }
  if (k >= 1 && out.alloc[k - 1] < phi[k - 1] - tol) problems.push_back(at(k) + ": below own position");
  for (std::size_t i = k + 1; i <= n; ++i) {
    if (std::abs(out.alloc[i - 1] - phi[i - 1]) > tol) problems.push_back(at(i) + ": not at own position");
  }
  if (!is_feasible(inst.env, out.alloc, tol)) problems.emplace_back("allocation exceeds supply");
  for (std::size_t i = 0; i < n; ++i) {
    if (out.pay[i] > budget + tol) problems.push_back(at(i + 1) + ": pays above budget");
  }
  if (!is_envy_free(v, out, tol)) problems.emplace_back("outcome is not envy free");
  return problems;
}

}  // namespace pfa
