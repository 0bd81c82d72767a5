#include <gtest/gtest.h>

#include "pfa/clinching.hpp"
#include "pfa/oracle.hpp"

namespace {

using pfa::oracle::LinearProgram;
using pfa::oracle::LpStatus;
using pfa::oracle::Sense;

TEST(Simplex, SingleBound) {
  LinearProgram lp(1);
  lp.objective = {1.0};
  lp.add_row({1.0}, Sense::LessEq, 1.0);
  const auto sol = pfa::oracle::solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.value, 1.0, 1e-12);
  EXPECT_NEAR(sol.x[0], 1.0, 1e-12);
}

TEST(Simplex, TwoVariables) {
  // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3
  LinearProgram lp(2);
  lp.objective = {3.0, 2.0};
  lp.add_row({1.0, 1.0}, Sense::LessEq, 4.0);
  lp.add_row({1.0, 3.0}, Sense::LessEq, 6.0);
  lp.add_row({1.0, 0.0}, Sense::LessEq, 3.0);
  const auto sol = pfa::oracle::solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.value, 11.0, 1e-12);
  EXPECT_NEAR(sol.x[0], 3.0, 1e-12);
  EXPECT_NEAR(sol.x[1], 1.0, 1e-12);
}

TEST(Simplex, EqualityAndLowerBounds) {
  // max -x - y, x + y = 2, x >= 0.5
  LinearProgram lp(2);
  lp.objective = {-1.0, -1.0};
  lp.add_row({1.0, 1.0}, Sense::Equal, 2.0);
  lp.add_row({1.0, 0.0}, Sense::GreaterEq, 0.5);
  const auto sol = pfa::oracle::solve_lp(lp);
  ASSERT_EQ(sol.status, LpStatus::Optimal);
  EXPECT_NEAR(sol.value, -2.0, 1e-12);
  EXPECT_GE(sol.x[0], 0.5 - 1e-12);
}

TEST(Simplex, InfeasibleAndUnbounded) {
  LinearProgram bad(1);
  bad.objective = {1.0};
  bad.add_row({1.0}, Sense::LessEq, 1.0);
  bad.add_row({1.0}, Sense::GreaterEq, 2.0);
  EXPECT_EQ(pfa::oracle::solve_lp(bad).status, LpStatus::Infeasible);

  LinearProgram open(2);
  open.objective = {1.0, 0.0};
  open.add_row({1.0, -1.0}, Sense::LessEq, 1.0);
  EXPECT_EQ(pfa::oracle::solve_lp(open).status, LpStatus::Unbounded);
}

TEST(BenchmarkLp, WelfareFixture) {
  const std::vector<double> v{4, 3, 2};
  const std::vector<double> w{1, 1, 0};
  const auto r = pfa::oracle::lp_efo_welfare(v, w, 1.0);
  ASSERT_EQ(r.status, LpStatus::Optimal);
  EXPECT_NEAR(r.objective, 6.5, 1e-9);
}

TEST(BenchmarkLp, RevenueSingleItem) {
  const std::vector<double> v{3, 2};
  const std::vector<double> w{1, 0};
  const auto open = pfa::oracle::lp_efo_revenue(v, w, pfa::kInfinity);
  ASSERT_EQ(open.status, LpStatus::Optimal);
  EXPECT_NEAR(open.objective, 3.0, 1e-9);
  const auto none = pfa::oracle::lp_efo_revenue(v, w, 0.0);
  ASSERT_EQ(none.status, LpStatus::Optimal);
  EXPECT_NEAR(none.objective, 0.0, 1e-12);
}

TEST(BenchmarkLp, RejectsLargeInstances) {
  const std::vector<double> v(pfa::oracle::kMaxLpAgents + 1, 1.0);
  EXPECT_THROW(pfa::oracle::lp_efo_welfare(v, v, 1.0), pfa::InvalidInput);
}

TEST(ClockSimulator, ConvergesAtFirstOrder) {
  const auto inst = pfa::make_sorted_instance({4, 3, 2}, {1, 1, 0}, 1.0);
  const auto exact = pfa::closed_form(inst).outcome;
  auto error = [&](double step) {
    const auto sim = pfa::oracle::simulate_clock(inst, step).outcome;
    double e = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
      e = std::max({e, std::abs(sim.alloc[i] - exact.alloc[i]), std::abs(sim.pay[i] - exact.pay[i])});
    }
    return e;
  };
  const double coarse = error(1e-2);
  const double fine = error(1e-3);
  EXPECT_LT(fine, 2e-3);
  EXPECT_LT(fine, 0.3 * coarse);
}

TEST(ClockSimulator, LargeBudgetIsVickrey) {
  const std::vector<double> v{5, 3, 1};
  const std::vector<double> w{1, 0, 0};
  const auto sim = pfa::oracle::simulate_clock(v, w, 100.0, 1e-3);
  EXPECT_NEAR(sim.outcome.alloc[0], 1.0, 1e-9);
  EXPECT_NEAR(sim.outcome.pay[0], 3.0, 2e-3);
  EXPECT_GT(sim.ticks, 0u);
}

TEST(ClockSimulator, ZeroBudgetClinchesNothing) {
  const std::vector<double> v{3, 2, 1};
  const std::vector<double> w{0.9, 0.5, 0.1};
  const auto sim = pfa::oracle::simulate_clock(v, w, 0.0, 1e-3);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(sim.outcome.alloc[i], 0.0);
    EXPECT_EQ(sim.outcome.pay[i], 0.0);
  }
}

TEST(EnvyCheck, FindsCorruption) {
  const std::vector<double> v{4, 3, 2};
  const auto inst = pfa::make_sorted_instance(v, {1, 1, 0}, 1.0);
  auto out = pfa::closed_form(inst).outcome;
  EXPECT_TRUE(pfa::oracle::exhaustive_envy_check(v, out).empty());
  out.pay[2] = 1.5;
  const auto found = pfa::oracle::exhaustive_envy_check(v, out);
  ASSERT_FALSE(found.empty());
  bool ir = false;
  for (const auto& [i, j] : found) ir = ir || (i == 2 && j == 2);
  EXPECT_TRUE(ir);
}

}  // namespace
