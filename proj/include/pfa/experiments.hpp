#pragma once

// Instance generators and seeded Monte Carlo experiments emitting CSV.
// Each row carries the seed that reproduces it; the report ends with one or
// more rows prefixed "#summary".

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>

#include "pfa/clinching.hpp"
#include "pfa/envyfree.hpp"
#include "pfa/oracle.hpp"
#include "pfa/profit.hpp"
#include "pfa/rng.hpp"

namespace pfa {

// ---------------------------------------------------------------------------
// Generators

enum class Distribution { Uniform, Exponential };

/// Values (N^3, N repeated N-1 times, N - eps), one item, budget 1.
inline BudgetedInstance tight_instance(std::size_t N, double eps = 1e-6) {
  if (N < 2) throw InvalidInput("tight instance needs N >= 2");
  const double big = static_cast<double>(N);
  std::vector<double> v{big * big * big};
  for (std::size_t i = 0; i + 1 < N; ++i) v.push_back(big);
  v.push_back(big - eps);
  std::vector<double> w(v.size(), 0.0);
  w[0] = 1.0;
  return normalize(v, w, 1.0);
}

/// Random values and sorted random weights; budget drawn in (0, max value)
/// unless given.
inline BudgetedInstance random_instance(std::size_t n, std::uint64_t seed, Distribution dist = Distribution::Uniform,
                                        std::optional<double> budget = std::nullopt) {
  Rng rng(seed);
  std::vector<double> v(n);
  std::vector<double> w(n);
  for (double& x : v) x = dist == Distribution::Uniform ? rng.uniform() : rng.exponential(1.0);
  for (double& x : w) x = rng.uniform();
  double vmax = 0.0;
  for (double x : v) vmax = std::max(vmax, x);
  const double b = budget ? *budget : rng.uniform() * vmax;
  return normalize(v, w, b);
}

// ---------------------------------------------------------------------------
// Experiments

enum class ExperimentKind { WelfareApprox, BspeRevenue, DominanceWalk, TightRatio, OracleAgreement };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::WelfareApprox;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double q = 0.25;
  std::size_t n = 8;
  Distribution dist = Distribution::Uniform;
  std::optional<double> budget;
  std::size_t n_min = 3;  // tight-ratio range
  std::size_t n_max = 400;
  double eps = 1e-6;
  std::string mechanism = "bspe";  // bspe-revenue: bspe | combined | bspe-nobudget
  std::optional<BudgetedInstance> instance;  // fixed instance instead of a generated one
};

struct ExperimentSummary {
  bool ok = true;
  std::size_t rows = 0;
};

namespace detail {

inline std::string num(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct MeanAccumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double std_error() const {
    if (count < 2) return 0.0;
    const double c = static_cast<double>(count);
    const double var = std::max(0.0, (sum_sq - sum * sum / c) / (c - 1.0));
    return std::sqrt(var / c);
  }
};

inline void check_trials(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw InvalidInput("trials must be at least 1");
}

inline ExperimentSummary welfare_approx(const ExperimentConfig& cfg, std::ostream& out) {
  check_trials(cfg);
  ExperimentSummary sum;
  out << "trial,seed,n,budget,efo_welfare,clinching_welfare,ratio,within_two\n";
  double worst = 0.0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = derive_seed(cfg.seed, t);
    const auto inst = random_instance(cfg.n, seed, cfg.dist, cfg.budget);
    const double efo = efo_welfare(inst).objective;
    const double clinch = closed_form(inst).outcome.welfare(inst.values());
    const double ratio = clinch > 0.0 ? efo / clinch : (efo > 0.0 ? kInfinity : 1.0);
    const bool ok = efo <= 2.0 * clinch + 1e-6;
    sum.ok = sum.ok && ok;
    worst = std::max(worst, ratio);
    out << t << ',' << seed << ',' << cfg.n << ',' << num(inst.budget()) << ',' << num(efo) << ',' << num(clinch)
        << ',' << num(ratio) << ',' << ok << '\n';
    ++sum.rows;
  }
  out << "#summary,max_ratio," << num(worst) << ",ok," << sum.ok << '\n';
  return sum;
}

inline ExperimentSummary bspe_revenue(const ExperimentConfig& cfg, std::ostream& out) {
  check_trials(cfg);
  ExperimentSummary sum;
  const auto inst =
      cfg.instance ? *cfg.instance : random_instance(cfg.n, derive_seed(cfg.seed, ~0ULL), cfg.dist, cfg.budget);
  const bool nobudget = cfg.mechanism == "bspe-nobudget";
  const bool combined = cfg.mechanism == "combined";
  if (!nobudget && !combined && cfg.mechanism != "bspe") throw InvalidInput("unknown mechanism: " + cfg.mechanism);
  check_coin(cfg.q);

  std::vector<double> v2(inst.profile.values);
  if (v2.size() >= 2) v2[0] = v2[1];
  const double efo2 =
      inst.size() >= 2 ? efo_revenue_value(v2, inst.env.weights, nobudget ? kInfinity : inst.budget()) : 0.0;
  double bound = 0.0;
  if (nobudget) {
    bound = nobudget_factor(cfg.q) * efo2;
  } else if (combined) {
    bound = efo2 / combined_factor(cfg.q);
  } else {
    bound = bspe_budget_bound(inst, cfg.q);
  }

  out << "trial,seed,q,revenue,efo2,bound,one_ahead_index\n";
  MeanAccumulator acc;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = derive_seed(cfg.seed, t);
    double revenue = 0.0;
    std::size_t index = 0;
    if (nobudget) {
      const auto r = bspe_nobudget(inst, cfg.q, seed);
      revenue = r.outcome.revenue();
      index = one_ahead_index(detail::pick(inst.values(), r.split.market), detail::pick(inst.values(), r.split.sample));
    } else if (combined) {
      revenue = combined_mechanism(inst, cfg.q, seed).revenue();
    } else {
      revenue = bspe_budget(inst, cfg.q, seed).revenue();
      const auto split = biased_sample(inst.size(), cfg.q, seed);
      index = one_ahead_index(detail::pick(inst.values(), split.market), detail::pick(inst.values(), split.sample));
    }
    acc.add(revenue);
    out << t << ',' << seed << ',' << num(cfg.q) << ',' << num(revenue) << ',' << num(efo2) << ',' << num(bound) << ','
        << index << '\n';
    ++sum.rows;
  }
  sum.ok = acc.mean() + 3.0 * acc.std_error() >= bound;
  out << "#summary,mean," << num(acc.mean()) << ",se," << num(acc.std_error()) << ",bound," << num(bound) << ",ok,"
      << sum.ok << '\n';
  return sum;
}

inline ExperimentSummary dominance_walk(const ExperimentConfig& cfg, std::ostream& out) {
  check_trials(cfg);
  check_coin(cfg.q);
  ExperimentSummary sum;
  constexpr std::size_t kBuckets = 10;
  const std::size_t n = cfg.n;
  out << "trial,seed,top_in_market,pointwise_fails,one_ahead_index\n";
  MeanAccumulator fails;
  MeanAccumulator fails_top;
  MeanAccumulator index_top;
  std::vector<MeanAccumulator> bucket(kBuckets + 1);
  std::vector<double> m;
  std::vector<double> s;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = derive_seed(cfg.seed, t);
    const auto split = biased_sample(n, cfg.q, seed);
    m.clear();
    s.clear();
    for (std::size_t r : split.market) m.push_back(static_cast<double>(n - r));
    for (std::size_t r : split.sample) s.push_back(static_cast<double>(n - r));
    const bool top = !split.market.empty() && split.market.front() == 0;
    const bool fail = !pointwise_dominates(m, s);
    const std::size_t k = one_ahead_index(m, s);
    fails.add(fail ? 1.0 : 0.0);
    if (top) {
      fails_top.add(fail ? 1.0 : 0.0);
      index_top.add(static_cast<double>(k));
      for (std::size_t i = 0; i <= kBuckets; ++i) bucket[i].add(k == i ? 1.0 : 0.0);
    }
    out << t << ',' << seed << ',' << top << ',' << fail << ',' << k << '\n';
    ++sum.rows;
  }

  const auto closed = walk_closed_forms(cfg.q);
  const auto pmf = walk_pmf(cfg.q, kBuckets);
  auto report = [&](const std::string& name, const MeanAccumulator& a, double target) {
    const bool ok = std::abs(a.mean() - target) <= 3.0 * a.std_error() + 1e-12;
    sum.ok = sum.ok && ok;
    out << "#summary," << name << ',' << num(a.mean()) << ",se," << num(a.std_error()) << ",target," << num(target)
        << ",ok," << ok << '\n';
  };
  report("pointwise_fail", fails, closed.ruin);
  report("pointwise_fail_given_top", fails_top, closed.ruin_squared);
  report("mean_index_given_top", index_top, closed.mean_index);
  for (std::size_t i = 1; i <= kBuckets; ++i) report("pmf_" + std::to_string(i), bucket[i], pmf.pmf[i]);
  return sum;
}

inline ExperimentSummary tight_ratio(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.n_min < 2 || cfg.n_max < cfg.n_min) throw InvalidInput("tight-ratio needs 2 <= N_min <= N_max");
  ExperimentSummary sum;
  out << "N,seed,efo_welfare,clinching_welfare,ratio,formula,abs_error\n";
  double prev = 0.0;
  bool increasing = true;
  double worst_err = 0.0;
  double last = 0.0;
  for (std::size_t N = cfg.n_min; N <= cfg.n_max; ++N) {
    const auto inst = tight_instance(N, cfg.eps);
    const double efo = efo_welfare(inst).objective;
    const double clinch = closed_form(inst).outcome.welfare(inst.values());
    const double ratio = efo / clinch;
    const double big = static_cast<double>(N);
    const double formula = (2.0 * big * big - big) / (big * big + big - 1.0);
    const double err = std::abs(ratio - formula);
    worst_err = std::max(worst_err, err);
    if (N > cfg.n_min && ratio <= prev) increasing = false;
    prev = ratio;
    last = ratio;
    out << N << ',' << cfg.seed << ',' << num(efo) << ',' << num(clinch) << ',' << num(ratio) << ',' << num(formula)
        << ',' << num(err) << '\n';
    ++sum.rows;
  }
  sum.ok = increasing && worst_err <= 1e-5;
  out << "#summary,final_ratio," << num(last) << ",max_abs_error," << num(worst_err) << ",increasing," << increasing
      << ",ok," << sum.ok << '\n';
  return sum;
}

inline ExperimentSummary oracle_agreement(const ExperimentConfig& cfg, std::ostream& out) {
  check_trials(cfg);
  ExperimentSummary sum;
  out << "trial,seed,n,budget,efo_welfare,lp_welfare,efo_revenue,lp_revenue,rel_diff\n";
  double worst = 0.0;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const std::uint64_t seed = derive_seed(cfg.seed, t);
    Rng pick_n(seed);
    const std::size_t n = 1 + static_cast<std::size_t>(pick_n.below(cfg.n));
    const auto inst = random_instance(n, seed, cfg.dist, cfg.budget);
    const double ew = efo_welfare(inst).objective;
    const double er = efo_revenue(inst).objective;
    const auto lw = oracle::lp_efo_welfare(inst);
    const auto lr = oracle::lp_efo_revenue(inst);
    const double diff = std::max(std::abs(ew - lw.objective) / std::max(1.0, std::abs(lw.objective)),
                                 std::abs(er - lr.objective) / std::max(1.0, std::abs(lr.objective)));
    worst = std::max(worst, diff);
    out << t << ',' << seed << ',' << n << ',' << num(inst.budget()) << ',' << num(ew) << ',' << num(lw.objective)
        << ',' << num(er) << ',' << num(lr.objective) << ',' << num(diff) << '\n';
    ++sum.rows;
  }
  sum.ok = worst <= 1e-6;
  out << "#summary,max_rel_diff," << num(worst) << ",ok," << sum.ok << '\n';
  return sum;
}

}  // namespace detail

inline ExperimentSummary run_experiment(const ExperimentConfig& cfg, std::ostream& out) {
  switch (cfg.kind) {
    case ExperimentKind::WelfareApprox: return detail::welfare_approx(cfg, out);
    case ExperimentKind::BspeRevenue: return detail::bspe_revenue(cfg, out);
    case ExperimentKind::DominanceWalk: return detail::dominance_walk(cfg, out);
    case ExperimentKind::TightRatio: return detail::tight_ratio(cfg, out);
    case ExperimentKind::OracleAgreement: return detail::oracle_agreement(cfg, out);
  }
  return {};
}

inline ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "welfare-approx") return ExperimentKind::WelfareApprox;
  if (name == "bspe-revenue") return ExperimentKind::BspeRevenue;
  if (name == "dominance-walk") return ExperimentKind::DominanceWalk;
  if (name == "tight-ratio") return ExperimentKind::TightRatio;
  if (name == "oracle-agreement") return ExperimentKind::OracleAgreement;
  throw InvalidInput("unknown experiment: " + name);
}

}  // namespace pfa
