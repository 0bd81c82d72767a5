#include <gtest/gtest.h>

#include <set>

#include "pfa/profit.hpp"

namespace {

TEST(Dominance, OneAheadIndex) {
  const std::vector<double> s{4, 3, 2};
  EXPECT_EQ(pfa::one_ahead_index(std::vector<double>{5, 4, 3, 2}, s), 0u);
  EXPECT_EQ(pfa::one_ahead_index(std::vector<double>{5, 4, 3}, s), 3u);
  EXPECT_EQ(pfa::one_ahead_index(std::vector<double>{1}, std::vector<double>{5, 4}), 2u);
  EXPECT_EQ(pfa::one_ahead_index(std::vector<double>{}, std::vector<double>{}), 0u);
}

TEST(Dominance, Pointwise) {
  EXPECT_TRUE(pfa::pointwise_dominates(std::vector<double>{5, 3}, std::vector<double>{5, 2}));
  EXPECT_FALSE(pfa::pointwise_dominates(std::vector<double>{5}, std::vector<double>{5, 2}));
  EXPECT_TRUE(pfa::pointwise_dominates(std::vector<double>{5}, std::vector<double>{5, 0}));
}

TEST(ProfitExtractor, ClinchingSingleItem) {
  const pfa::PositionEnvironment env{{1.0}};
  const std::vector<double> e{3, 2};
  const std::vector<double> m{4, 3};
  const auto out = pfa::clinching_profit_extractor(e, m, env, pfa::kInfinity);
  EXPECT_NEAR(out.alloc[0], 1.0, 1e-12);
  EXPECT_NEAR(out.alloc[1], 0.0, 1e-12);
  EXPECT_NEAR(out.pay[0], 3.0, 1e-12);
  EXPECT_NEAR(out.pay[1], 0.0, 1e-12);
}

TEST(ProfitExtractor, RejectionSingleItem) {
  const pfa::PositionEnvironment env{{1.0}};
  const std::vector<double> e{3, 2};
  const auto ok = pfa::per_profit_extractor(e, std::vector<double>{4, 3}, env);
  EXPECT_FALSE(ok.rejected);
  EXPECT_NEAR(ok.outcome.alloc[0], 1.0, 1e-12);
  EXPECT_NEAR(ok.outcome.pay[0], 3.0, 1e-12);
  EXPECT_NEAR(ok.outcome.revenue(), 3.0, 1e-12);

  const auto no = pfa::per_profit_extractor(std::vector<double>{5, 1}, std::vector<double>{4, 3}, env);
  EXPECT_TRUE(no.rejected);
  EXPECT_NEAR(no.outcome.revenue(), 0.0, 1e-12);
}

TEST(Sampling, BiasedSampleIsDeterministicPartition) {
  const auto a = pfa::biased_sample(50, 0.3, 7);
  const auto b = pfa::biased_sample(50, 0.3, 7);
  EXPECT_EQ(a.market, b.market);
  EXPECT_EQ(a.sample, b.sample);
  EXPECT_EQ(a.market.size() + a.sample.size(), 50u);
  EXPECT_THROW(pfa::biased_sample(5, 0.5, 1), pfa::InvalidInput);
  EXPECT_THROW(pfa::biased_sample(5, 0.0, 1), pfa::InvalidInput);
}

TEST(Sampling, GroupSampleCoversEveryAgentOnce) {
  std::vector<double> v(40);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = 40.0 - static_cast<double>(i);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto split = pfa::group_sample(v, 0.25, seed);
    std::multiset<std::size_t> seen(split.market.begin(), split.market.end());
    seen.insert(split.sample.begin(), split.sample.end());
    EXPECT_EQ(seen.size(), v.size());
    EXPECT_EQ(std::set<std::size_t>(seen.begin(), seen.end()).size(), v.size());
    EXPECT_EQ(split.group_a.size() + split.group_b.size() + split.group_c.size(), v.size());
    if (!split.market.empty() && !split.sample.empty()) {
      EXPECT_LT(split.market.front(), split.sample.front());
    }
  }
}

TEST(Mechanisms, PseudoVickrey) {
  const auto inst = pfa::make_sorted_instance({5, 3}, {1}, 2.0);
  const auto out = pfa::pseudo_vickrey(inst);
  EXPECT_NEAR(out.alloc[0], 13.0 / 18.0, 1e-12);
  EXPECT_NEAR(out.alloc[1], 5.0 / 18.0, 1e-12);
  EXPECT_NEAR(out.pay[0], 2.0, 1e-12);
  EXPECT_NEAR(out.pay[1], 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(pfa::efo_second_alone(inst), 2.0, 1e-12);
}

TEST(Mechanisms, BudgetedAreDeterministicAndRational) {
  std::vector<double> v, w;
  for (int i = 0; i < 30; ++i) {
    v.push_back(1.0 + 0.37 * ((i * 7) % 30));
    w.push_back(1.0 / (1.0 + i));
  }
  const auto inst = pfa::normalize(v, w, 2.5);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto a = pfa::bspe_budget(inst, 0.25, seed);
    const auto b = pfa::bspe_budget(inst, 0.25, seed);
    EXPECT_EQ(a.alloc, b.alloc);
    EXPECT_EQ(a.pay, b.pay);
    const auto c = pfa::combined_mechanism(inst, 0.211, seed);
    for (const auto* o : {&a, &c}) {
      EXPECT_TRUE(pfa::is_feasible(inst.env, o->alloc, 1e-9));
      for (std::size_t i = 0; i < inst.size(); ++i) {
        EXPECT_LE(o->pay[i], inst.budget() + 1e-9);
        EXPECT_LE(o->pay[i], inst.profile.values[i] * o->alloc[i] + 1e-9);
      }
    }
  }
}

TEST(Mechanisms, NoBudget) {
  const auto inst = pfa::make_sorted_instance({9, 7, 6, 4, 3, 2, 2, 1}, {1, 0.5, 0.25}, pfa::kInfinity);
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto a = pfa::bspe_nobudget(inst, 0.268, seed);
    const auto b = pfa::bspe_nobudget(inst, 0.268, seed);
    EXPECT_EQ(a.outcome.pay, b.outcome.pay);
    for (std::size_t i = 0; i < inst.size(); ++i) {
      EXPECT_LE(a.outcome.pay[i], inst.profile.values[i] * a.outcome.alloc[i] + 1e-9);
    }
  }
  EXPECT_THROW(pfa::bspe_nobudget(pfa::make_sorted_instance({1, 0}, {1}, pfa::kInfinity), 0.25, 1),
               pfa::InvalidInput);
}

TEST(Factors, KnownConstants) {
  EXPECT_NEAR(pfa::combined_factor(0.211), 10.000023, 1e-6);
  EXPECT_NEAR(pfa::nobudget_factor(0.268), 0.133956, 1e-6);
  const double p = 0.211;
  const double mix = pfa::combined_mix_weight(p);
  EXPECT_NEAR(pfa::combined_vickrey_probability(p), mix / (1.0 + mix), 1e-15);
}

TEST(Walk, DistributionAtQuarter) {
  const auto w = pfa::walk_pmf(0.25, 500);
  EXPECT_NEAR(w.pmf[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(w.pmf[1], 0.125, 1e-15);
  double tail = 0.0, mean = 0.0;
  for (std::size_t i = 1; i < w.pmf.size(); ++i) {
    tail += w.pmf[i];
    mean += static_cast<double>(i) * w.pmf[i];
  }
  const auto cf = pfa::walk_closed_forms(0.25);
  EXPECT_NEAR(tail, cf.ruin, 1e-12);
  EXPECT_NEAR(cf.ruin, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(cf.ruin_squared, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(mean, cf.mean_index, 1e-12);
  EXPECT_NEAR(cf.mean_index, 1.0, 1e-15);
  EXPECT_LT(w.tail_bound, 1e-12);
}

}  // namespace
