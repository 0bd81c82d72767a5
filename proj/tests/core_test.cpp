#include <gtest/gtest.h>

#include "pfa/core.hpp"
#include "pfa/io.hpp"

namespace {

using pfa::InvalidInput;

// Top agent's minimum envy-free payment when the top i share evenly and the
// rest keep their positions, summed straight from the allocation.
double top_payment_by_definition(const std::vector<double>& v, const std::vector<double>& phi, std::size_t i) {
  const std::size_t n = v.size();
  std::vector<double> x(phi);
  double avg = 0.0;
  for (std::size_t j = 0; j < i; ++j) avg += phi[j];
  avg /= static_cast<double>(i);
  for (std::size_t j = 0; j < i; ++j) x[j] = avg;
  double p = 0.0;
  for (std::size_t j = 1; j < n; ++j) p += (x[j - 1] - x[j]) * v[j];
  return p;
}

TEST(Normalize, SortsValuesAndKeepsInputOrder) {
  const std::vector<double> v{2.0, 5.0, 3.0};
  const std::vector<double> w{0.2, 1.0};
  const auto inst = pfa::normalize(v, w, 1.5);
  EXPECT_EQ(inst.profile.values, (std::vector<double>{5.0, 3.0, 2.0}));
  EXPECT_EQ(inst.env.weights, (std::vector<double>{1.0, 0.2, 0.0}));
  EXPECT_EQ(inst.order, (std::vector<std::size_t>{1, 2, 0}));
  EXPECT_EQ(pfa::input_order_values(inst), v);
}

TEST(Normalize, TiesKeepInputOrder) {
  const std::vector<double> v{1.0, 2.0, 2.0};
  const std::vector<double> w{1.0};
  const auto inst = pfa::normalize(v, w, 1.0);
  EXPECT_EQ(inst.order, (std::vector<std::size_t>{1, 2, 0}));
}

TEST(Normalize, RejectsBadInput) {
  const std::vector<double> ok{1.0};
  const std::vector<double> w{0.5};
  EXPECT_THROW(pfa::normalize(std::vector<double>{-1.0}, w, 1.0), InvalidInput);
  EXPECT_THROW(pfa::normalize(std::vector<double>{NAN}, w, 1.0), InvalidInput);
  EXPECT_THROW(pfa::normalize(ok, std::vector<double>{1.5}, 1.0), InvalidInput);
  EXPECT_THROW(pfa::normalize(ok, w, -0.1), InvalidInput);
  EXPECT_THROW(pfa::normalize(ok, w, NAN), InvalidInput);
  EXPECT_THROW(pfa::normalize(ok, std::vector<double>{0.5, 0.5}, 1.0), InvalidInput);
  EXPECT_NO_THROW(pfa::normalize(ok, w, pfa::kInfinity));
}

TEST(Supply, CumulativeAndAverages) {
  pfa::PositionEnvironment env{{1.0, 0.5, 0.25}};
  EXPECT_TRUE(env.valid());
  EXPECT_EQ(pfa::cumulative_supply(env), (std::vector<double>{1.0, 1.5, 1.75}));
  EXPECT_DOUBLE_EQ(pfa::average_top(env, 2), 0.75);
  EXPECT_THROW(pfa::average_top(env, 0), std::out_of_range);
  EXPECT_THROW(pfa::average_top(env, 4), std::out_of_range);
  EXPECT_FALSE((pfa::PositionEnvironment{{0.5, 0.6}}).valid());
}

TEST(IronedTopPayments, WorkedFixture) {
  const auto inst = pfa::make_sorted_instance({4, 3, 2}, {1, 1, 0}, 1.0);
  const auto tops = pfa::ironed_top_payments(inst);
  ASSERT_EQ(tops.size(), 3u);
  EXPECT_NEAR(tops[0], 2.0, 1e-12);
  EXPECT_NEAR(tops[1], 2.0, 1e-12);
  EXPECT_NEAR(tops[2], 0.0, 1e-12);
  EXPECT_THROW(pfa::ironed_top_payment(inst, 0), std::out_of_range);
}

TEST(IronedTopPayments, MatchDefinitionAndDecrease) {
  const std::vector<double> v{9.0, 7.0, 4.0, 4.0, 1.5, 0.5};
  const std::vector<double> phi{0.9, 0.6, 0.6, 0.3, 0.1, 0.0};
  const auto inst = pfa::make_sorted_instance(v, phi, 1.0);
  const auto tops = pfa::ironed_top_payments(inst);
  for (std::size_t i = 1; i <= v.size(); ++i) {
    EXPECT_NEAR(tops[i - 1], top_payment_by_definition(v, phi, i), 1e-12) << i;
    if (i > 1) {
      EXPECT_LE(tops[i - 1], tops[i - 2] + 1e-12);
    }
  }
  EXPECT_NEAR(tops.back(), 0.0, 1e-12);
}

TEST(Feasibility, PrefixSums) {
  pfa::PositionEnvironment env{{1.0, 0.0}};
  EXPECT_TRUE(pfa::is_feasible(env, std::vector<double>{0.5, 0.5}));
  EXPECT_FALSE(pfa::is_feasible(env, std::vector<double>{0.6, 0.5}));
  EXPECT_FALSE(pfa::is_feasible(env, std::vector<double>{-0.1, 0.0}));
}

TEST(Restrict, SubInstanceTruncatesEnvironment) {
  const auto inst = pfa::make_sorted_instance({5, 4, 3, 2}, {1.0, 0.5, 0.25, 0.1}, 2.0);
  const std::vector<std::size_t> ranks{1, 3};
  const auto sub = pfa::restrict_to(inst, ranks);
  EXPECT_EQ(sub.profile.values, (std::vector<double>{4.0, 2.0}));
  EXPECT_EQ(sub.env.weights, (std::vector<double>{1.0, 0.5}));
  EXPECT_EQ(sub.budget(), 2.0);
}

TEST(Json, RoundTripCanonicalDocument) {
  const std::string doc = R"({"budget":1.5,"values":[2.0,5.0,3.0],"weights":[1.0,0.5,0.0]})";
  const auto inst = pfa::parse_instance(doc);
  EXPECT_EQ(pfa::serialize_instance(inst), pfa::Json::parse(doc).dump());
}

TEST(Json, InfiniteBudget) {
  const auto inst = pfa::parse_instance(R"({"values":[1,2],"weights":[1],"budget":"inf"})");
  EXPECT_TRUE(std::isinf(inst.budget()));
  EXPECT_EQ(pfa::instance_to_json(inst)["budget"], "inf");
}

TEST(Json, OutcomeInInputOrder) {
  const auto inst = pfa::parse_instance(R"({"values":[1,3],"weights":[1,0],"budget":"inf"})");
  pfa::Outcome sorted(2);
  sorted.alloc = {1.0, 0.0};
  sorted.pay = {1.0, 0.0};
  const auto j = pfa::outcome_to_json(inst, sorted);
  EXPECT_EQ(j["alloc"], pfa::Json::parse("[0.0, 1.0]"));
  EXPECT_EQ(j["pay"], pfa::Json::parse("[0.0, 1.0]"));
  EXPECT_DOUBLE_EQ(j["welfare"].get<double>(), 3.0);
  EXPECT_DOUBLE_EQ(j["revenue"].get<double>(), 1.0);
}

TEST(Json, MalformedDocuments) {
  EXPECT_THROW(pfa::parse_instance("{"), InvalidInput);
  EXPECT_THROW(pfa::parse_instance("[]"), InvalidInput);
  EXPECT_THROW(pfa::parse_instance(R"({"values":[1],"weights":[1]})"), InvalidInput);
  EXPECT_THROW(pfa::parse_instance(R"({"values":[1],"weights":[1],"budget":"lots"})"), InvalidInput);
  EXPECT_THROW(pfa::parse_instance(R"({"values":["a"],"weights":[1],"budget":1})"), InvalidInput);
  EXPECT_THROW(pfa::parse_instance(R"({"values":1,"weights":[1],"budget":1})"), InvalidInput);
}

}  // namespace
