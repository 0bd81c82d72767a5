#pragma once

// Prior-free revenue mechanisms built on profit extraction: a sample of the
// agents supplies an estimate, and the market is offered the envy-free
// revenue-optimal allocation of that estimate.

#include "pfa/clinching.hpp"
#include "pfa/core.hpp"
#include "pfa/envyfree.hpp"
#include "pfa/rng.hpp"

namespace pfa {

// ---------------------------------------------------------------------------
// Dominance

/// Smallest k such that m_{i+1} >= s_i for every i > k, with both lists
/// zero-padded. k = 0 means m is one-ahead of s everywhere.
inline std::size_t one_ahead_index(std::span<const double> m, std::span<const double> s) {
  const std::size_t len = std::max(m.size(), s.size()) + 1;
  auto at = [](std::span<const double> xs, std::size_t i) { return i < xs.size() ? xs[i] : 0.0; };
  std::size_t k = 0;
  for (std::size_t i = 1; i <= len; ++i) {
    if (at(m, i) < at(s, i - 1)) k = i;
  }
  return k;
}

/// m_i >= s_i for all i, zero-padded.
inline bool pointwise_dominates(std::span<const double> m, std::span<const double> s) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((i < m.size() ? m[i] : 0.0) < s[i]) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Profit extractors

namespace detail {

inline std::vector<double> sorted_desc(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end(), std::greater<>());
  return xs;
}

/// Base weights truncated or zero-padded to `n`.
inline std::vector<double> resized_weights(const PositionEnvironment& env, std::size_t n) {
  std::vector<double> w(env.weights);
  w.resize(n, 0.0);
  return w;
}

}  // namespace detail

/// Envy-free revenue-optimal allocation for the estimate, computed in the
/// base environment sized to the estimate.
inline std::vector<double> estimate_allocation(std::span<const double> estimate, const PositionEnvironment& env,
                                               double budget) {
  std::vector<double> e(estimate.begin(), estimate.end());
  const std::size_t n = e.size();
  auto x = efo_revenue(make_sorted_instance(std::move(e), detail::resized_weights(env, n), budget)).outcome.alloc;
  for (double& xi : x) xi = std::clamp(xi, 0.0, 1.0);
  return x;
}

/// Clinching profit extractor: clinching on `actual` with position weights
/// equal to the estimate's envy-free optimal allocation. Both lists sorted
/// non-increasing; the outcome is indexed like `actual`.
inline Outcome clinching_profit_extractor(std::span<const double> estimate, std::span<const double> actual,
                                          const PositionEnvironment& env, double budget) {
  auto weights = estimate_allocation(estimate, env, budget);
  weights.resize(actual.size(), 0.0);
  std::vector<double> v(actual.begin(), actual.end());
  return closed_form(make_sorted_instance(std::move(v), std::move(weights), budget)).outcome;
}

struct PerResult {
  Outcome outcome;
  bool rejected = false;
};

namespace detail {

/// Profit extractor with rejection over real-valued market bids `m` and
/// estimate `e` (both sorted non-increasing). `tail_ok` carries the part of
/// the dominance test that no single market bid can change.
inline PerResult per_core(std::span<const double> m, std::span<const double> e, std::span<const double> target,
                          bool tail_ok) {
  const std::size_t n = m.size();
  const std::size_t overlap = std::min(n, e.size());
  PerResult res;
  res.outcome = Outcome(n);

  auto dominated = [&](std::span<const double> market) {
    for (std::size_t i = 0; i < overlap; ++i) {
      if (e[i] > market[i]) return false;
    }
    return true;
  };
  auto share = [&](std::size_t rank) { return rank < target.size() ? target[rank] : 0.0; };

  if (!tail_ok || !dominated(m)) {
    res.rejected = true;
    return res;
  }

  std::vector<double> others;
  others.reserve(n + e.size());
  for (std::size_t r = 0; r < n; ++r) {
    const double bid = m[r];
    res.outcome.alloc[r] = share(r);
    if (res.outcome.alloc[r] <= 0.0) continue;

    // allocation as a function of own bid z, with everyone else fixed
    std::vector<double> rest;
    rest.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != r) rest.push_back(m[j]);
    }
    auto alloc_at = [&](double z) {
      std::vector<double> market(rest);
      const auto pos = static_cast<std::size_t>(
          std::upper_bound(market.begin(), market.end(), z, std::greater<>()) - market.begin());
      market.insert(market.begin() + static_cast<std::ptrdiff_t>(pos), z);
      return dominated(market) ? share(pos) : 0.0;
    };

    others.assign(rest.begin(), rest.end());
    others.insert(others.end(), e.begin(), e.end());
    std::vector<double> cuts{0.0, bid};
    for (double x : others) {
      if (x > 0.0 && x < bid) cuts.push_back(x);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double area = 0.0;
    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      area += alloc_at(0.5 * (cuts[c] + cuts[c + 1])) * (cuts[c + 1] - cuts[c]);
    }
    res.outcome.pay[r] = std::max(0.0, bid * res.outcome.alloc[r] - area);
  }
  return res;
}

}  // namespace detail

/// Profit extractor with rejection (no budget). If the estimate exceeds the
/// sorted bids anywhere, everyone is rejected; otherwise rank i is served
/// with the estimate's optimal allocation at its incentive-compatible price.
inline PerResult per_profit_extractor(std::span<const double> estimate, std::span<const double> actual,
                                      const PositionEnvironment& env) {
  const auto target = estimate_allocation(estimate, env, kInfinity);
  bool tail_ok = true;
  for (std::size_t i = actual.size(); i < estimate.size(); ++i) tail_ok = tail_ok && !(estimate[i] > 0.0);
  return detail::per_core(actual, estimate, target, tail_ok);
}

// ---------------------------------------------------------------------------
// Sampling

struct SamplingSplit {
  std::vector<std::size_t> market;  // sorted ranks of real agents
  std::vector<std::size_t> sample;
  std::vector<std::size_t> group_a;  // grouped variant only
  std::vector<std::size_t> group_b;
  std::vector<std::size_t> group_c;
  double coin = 0.0;
  bool swapped = false;
  // grouped variant: placeholder ranks (counted after the real agents) on
  // each side, and whether the placeholder part of the dominance test passes
  std::vector<std::size_t> market_pads;
  std::vector<std::size_t> sample_pads;
  bool tail_ok = true;
};

inline void check_coin(double q) {
  if (!(q > 0.0 && q < 0.5)) throw InvalidInput("sampling probability must lie in (0, 0.5)");
}

/// Each agent joins the sample independently with probability q.
inline SamplingSplit biased_sample(std::size_t n, double q, std::uint64_t seed) {
  check_coin(q);
  SamplingSplit split;
  split.coin = q;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) (rng.bernoulli(q) ? split.sample : split.market).push_back(i);
  return split;
}

namespace detail {

inline std::vector<double> pick(std::span<const double> values, std::span<const std::size_t> ranks) {
  std::vector<double> out;
  out.reserve(ranks.size());
  for (std::size_t r : ranks) out.push_back(values[r]);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Budgeted mechanisms

/// Biased sampling profit extraction with a common budget.
inline Outcome bspe_budget(const BudgetedInstance& inst, double q, std::uint64_t seed) {
  const auto split = biased_sample(inst.size(), q, seed);
  Outcome out(inst.size());
  if (split.market.empty()) return out;
  const auto m = detail::pick(inst.values(), split.market);
  const auto s = detail::pick(inst.values(), split.sample);
  const auto pe = clinching_profit_extractor(s, m, inst.env, inst.budget());
  for (std::size_t j = 0; j < split.market.size(); ++j) {
    out.alloc[split.market[j]] = pe.alloc[j];
    out.pay[split.market[j]] = pe.pay[j];
  }
  return out;
}

/// Clinching with only the top position kept.
inline Outcome pseudo_vickrey(const BudgetedInstance& inst) {
  if (inst.size() == 0) return {};
  std::vector<double> w(inst.size(), 0.0);
  w[0] = inst.env.weights[0];
  std::vector<double> v(inst.profile.values);
  return closed_form(make_sorted_instance(std::move(v), std::move(w), inst.budget())).outcome;
}

/// Mixing weight q^ for the combined mechanism.
inline double combined_mix_weight(double p) {
  return (1.0 - p) * p + p * (1.0 - p) / ((1.0 - 2.0 * p) * (1.0 - 2.0 * p));
}

/// Probability with which the combined mechanism runs pseudo-Vickrey.
inline double combined_vickrey_probability(double p) {
  const double w = combined_mix_weight(p);
  return w / (1.0 + w);
}

inline double combined_factor(double p) {
  return 1.0 + 1.0 / ((1.0 - p) * p) + 1.0 / ((1.0 - 2.0 * p) * (1.0 - 2.0 * p));
}

inline Outcome combined_mechanism(const BudgetedInstance& inst, double p, std::uint64_t seed) {
  check_coin(p);
  Rng rng(derive_seed(seed, 0));
  if (rng.bernoulli(combined_vickrey_probability(p))) return pseudo_vickrey(inst);
  return bspe_budget(inst, p, derive_seed(seed, 1));
}

/// Single-agent benchmark: the second value alone in the top position.
inline double efo_second_alone(const BudgetedInstance& inst) {
  if (inst.size() < 2) return 0.0;
  return efo_revenue_value({inst.profile.values[1]}, {inst.env.weights[0]}, inst.budget());
}

/// Revenue benchmark without the top agent.
inline double efo_without_top(const BudgetedInstance& inst) {
  if (inst.size() < 2) return 0.0;
  std::vector<double> v(inst.profile.values.begin() + 1, inst.profile.values.end());
  return efo_revenue_value(std::move(v), detail::resized_weights(inst.env, inst.size() - 1), inst.budget());
}

/// (1-q) q EFO(v without top) - q(1-q)/(1-2q)^2 EFO(v_2 alone)
inline double bspe_budget_bound(const BudgetedInstance& inst, double q) {
  const double c = q * (1.0 - q) / ((1.0 - 2.0 * q) * (1.0 - 2.0 * q));
  return (1.0 - q) * q * efo_without_top(inst) - c * efo_second_alone(inst);
}

// ---------------------------------------------------------------------------
// Mechanism without budgets
//
// Bids are padded with infinitely many placeholders that rank below every
// positive value and among themselves by index, and carry no value.
// Placeholders are assigned to groups lazily until the split is decided and
// the placeholder part of the dominance walk has either failed or drifted
// `pad_cap` steps clear.

/// Groups A, B, C with probabilities q, q, 1-2q; market A u C, sample B,
/// with A and B swapped if B holds the higher top bid.
inline SamplingSplit group_sample(std::span<const double> values, double q, std::uint64_t seed,
                                  std::size_t pad_cap = 700) {
  check_coin(q);
  const std::size_t n = values.size();
  SamplingSplit split;
  split.coin = q;
  Rng rng(seed);
  auto draw = [&] {
    const double u = rng.uniform();
    return u < q ? 0 : (u < 2.0 * q ? 1 : 2);
  };
  std::vector<std::size_t> pads[3];
  for (std::size_t i = 0; i < n; ++i) {
    switch (draw()) {
      case 0: split.group_a.push_back(i); break;
      case 1: split.group_b.push_back(i); break;
      default: split.group_c.push_back(i); break;
    }
  }
  std::size_t next_pad = 0;
  auto add_pad = [&] { pads[draw()].push_back(next_pad++); };
  auto has = [&](int g, const std::vector<std::size_t>& real) { return !real.empty() || !pads[g].empty(); };
  while (!has(0, split.group_a) || !has(1, split.group_b)) add_pad();

  // compare the tops of A and B: real beats placeholder, placeholders by index
  bool b_higher = false;
  if (!split.group_a.empty() && !split.group_b.empty()) {
    b_higher = values[split.group_b.front()] > values[split.group_a.front()];
  } else if (split.group_a.empty() && split.group_b.empty()) {
    b_higher = pads[1].front() < pads[0].front();
  } else {
    b_higher = split.group_a.empty();
  }
  if (b_higher) {
    std::swap(split.group_a, split.group_b);
    std::swap(pads[0], pads[1]);
    split.swapped = true;
  }

  split.market = split.group_a;
  split.market.insert(split.market.end(), split.group_c.begin(), split.group_c.end());
  std::sort(split.market.begin(), split.market.end());
  split.sample = split.group_b;

  // placeholder walk: market minus sample count, starting after the reals
  auto walk_ok = [&](std::size_t upto, long& pos) {
    std::vector<int> side(upto, 0);
    for (int g = 0; g < 3; ++g) {
      for (std::size_t r : pads[g]) {
        if (r < upto) side[r] = g;
      }
    }
    pos = static_cast<long>(split.market.size()) - static_cast<long>(split.sample.size());
    if (pos < 0) return false;
    for (std::size_t r = 0; r < upto; ++r) {
      pos += side[r] == 1 ? -1 : 1;
      if (pos < 0) return false;
    }
    return true;
  };
  long pos = 0;
  bool ok = walk_ok(next_pad, pos);
  while (ok && pos < static_cast<long>(pad_cap)) {
    add_pad();
    const bool to_sample = !pads[1].empty() && pads[1].back() == next_pad - 1;
    pos += to_sample ? -1 : 1;
    ok = pos >= 0;
  }
  split.tail_ok = ok;
  split.sample_pads = pads[1];
  split.market_pads = pads[0];
  split.market_pads.insert(split.market_pads.end(), pads[2].begin(), pads[2].end());
  std::sort(split.market_pads.begin(), split.market_pads.end());
  return split;
}

struct NoBudgetResult {
  Outcome outcome;
  SamplingSplit split;
  bool rejected = false;
  bool fallback = false;
  bool bumped = false;
};

/// Biased sampling profit extraction without budgets; values must be
/// strictly positive.
inline NoBudgetResult bspe_nobudget(const BudgetedInstance& inst, double q, std::uint64_t seed) {
  const auto v = inst.values();
  for (double x : v) {
    if (!(x > 0.0)) throw InvalidInput("values must be strictly positive");
  }
  NoBudgetResult res;
  res.outcome = Outcome(inst.size());
  if (inst.size() == 0) return res;
  res.split = group_sample(v, q, seed);
  const auto& split = res.split;

  const auto m = detail::pick(v, split.market);
  const auto e = detail::pick(v, split.sample);
  const auto target = estimate_allocation(e, inst.env, kInfinity);
  const auto per = detail::per_core(m, e, target, split.tail_ok);
  res.rejected = per.rejected;
  for (std::size_t j = 0; j < split.market.size(); ++j) {
    res.outcome.alloc[split.market[j]] = per.outcome.alloc[j];
    res.outcome.pay[split.market[j]] = per.outcome.pay[j];
  }

  bool served = false;
  for (double x : res.outcome.alloc) served = served || x > 0.0;
  if (!served) {
    const double phi1 = inst.env.weights[0];
    if (phi1 > 0.0) {
      res.outcome.alloc[0] = phi1;
      res.outcome.pay[0] = (inst.size() >= 2 ? v[1] : 0.0) * phi1;
      res.fallback = true;
    }
    return res;
  }

  // the top of A wins and the runner-up of A u B sits in B
  if (!split.group_a.empty()) {
    const std::size_t top = split.group_a.front();
    const bool a_has_second = split.group_a.size() >= 2;
    const bool b_has_real = !split.group_b.empty();
    const bool runner_in_b = b_has_real && (!a_has_second || split.group_b.front() < split.group_a[1]);
    if (res.outcome.alloc[top] > 0.0 && runner_in_b) {
      const double floor = v[split.group_b.front()] * res.outcome.alloc[top];
      if (floor > res.outcome.pay[top]) {
        res.outcome.pay[top] = floor;
        res.bumped = true;
      }
    }
  }
  return res;
}

/// min{q - r^2, r^2}, r = q/(1-q)
inline double nobudget_factor(double q) {
  const double r = q / (1.0 - q);
  return std::min(q - r * r, r * r);
}

// ---------------------------------------------------------------------------
// Dominance walk

struct WalkPmf {
  double coin = 0.0;
  std::vector<double> pmf;  // pmf[i] = P[one-ahead index = i | top agent in market], i = 0..i_max
  double tail_bound = 0.0;  // bound on the mass beyond i_max
};

inline WalkPmf walk_pmf(double q, std::size_t i_max) {
  check_coin(q);
  WalkPmf w;
  w.coin = q;
  w.pmf.assign(i_max + 1, 0.0);
  const double x = q * (1.0 - q);
  const double scale = (1.0 - 2.0 * q) / (2.0 * (1.0 - q));
  double central = 1.0;  // C(2i, i) x^i
  for (std::size_t i = 1; i <= i_max; ++i) {
    const double k = static_cast<double>(i);
    central *= x * (2.0 * k) * (2.0 * k - 1.0) / (k * k);
    w.pmf[i] = central * scale;
  }
  w.pmf[0] = 1.0 - q / (1.0 - q);
  const double rho = 4.0 * x;
  w.tail_bound = i_max > 0 ? w.pmf[i_max] * rho / (1.0 - rho) : q / (1.0 - q);
  return w;
}

struct WalkClosedForms {
  double ruin = 0.0;         // q / (1-q)
  double ruin_squared = 0.0;
  double mean_index = 0.0;   // q / (1-2q)^2
};

inline WalkClosedForms walk_closed_forms(double q) {
  check_coin(q);
  const double r = q / (1.0 - q);
  return {r, r * r, q / ((1.0 - 2.0 * q) * (1.0 - 2.0 * q))};
}

}  // namespace pfa
