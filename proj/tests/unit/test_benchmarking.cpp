

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "ecobounds/benchmarking.hpp"
#include "ecobounds/error.hpp"
#include "helpers.hpp"

using namespace ecobounds;

namespace {

// V = (c, d1, d2): one continuous and two binary columns. The treatment
// effect depends on c, and on d1 when d1_effect is non-zero.
Dataset bench_dataset(std::size_t n, std::uint64_t seed, double d1_effect) {
  Dataset d;
  d.bounds = {-100, 100};
  d.w_support = WSupport({{0.0}, {1.0}});
  d.columns = {{"c", "d1", "d2"}, {false, true, true}, {"w"}};
  Rng r(seed);
  for (std::size_t i = 0; i < n; ++i) {
    ObservedSample s;
    s.v = Vector{{r.normal(1, 0.5), r.bernoulli(0.5) ? 1.0 : 0.0, r.bernoulli(0.5) ? 1.0 : 0.0}};
    s.e = r.bernoulli(0.5);
    if (s.e) {
      s.a = r.bernoulli(0.5) ? 1 : 0;
      const double cate = 0.7 * s.v[0] + d1_effect * s.v[1];
      s.y = 1.0 + s.v[0] + 2 * s.v[1] + 3 * s.v[2] + *s.a * cate + 0.1 * r.normal();
    } else {
      s.w = r.index(2);
    }
    d.samples.push_back(s);
  }
  return d;
}

Dataset reorder_columns(const Dataset& d, const std::vector<Eigen::Index>& order) {
  Dataset out = d;
  for (std::size_t j = 0; j < order.size(); ++j) {
    out.columns.v_names[j] = d.columns.v_names[static_cast<std::size_t>(order[j])];
    out.columns.v_discrete[j] = d.columns.v_discrete[static_cast<std::size_t>(order[j])];
  }
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < order.size(); ++j)
      out.samples[i].v[static_cast<Eigen::Index>(j)] = d.samples[i].v[order[j]];
  return out;
}

}  // namespace

TEST(Combinations, CountAndOrder) {
  const auto c = combinations(5, 2);
  ASSERT_EQ(c.size(), 10u);
  EXPECT_EQ(c.front(), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(c[1], (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(c.back(), (std::vector<std::size_t>{3, 4}));
  EXPECT_EQ(combinations(6, 3).size(), 20u);
  EXPECT_EQ(combinations(4, 4).size(), 1u);
  EXPECT_TRUE(std::is_sorted(c.begin(), c.end()));
}

TEST(BenchmarkStatistic, ParseAndDescribe) {
  EXPECT_EQ(BenchmarkStatistic::parse("mean-abs").kind, BenchmarkStatistic::Kind::mean_abs);
  const auto q = BenchmarkStatistic::parse("quantile(0.9)");
  EXPECT_EQ(q.kind, BenchmarkStatistic::Kind::quantile);
  EXPECT_DOUBLE_EQ(q.q, 0.9);
  EXPECT_EQ(BenchmarkStatistic::parse(q.describe()).q, 0.9);
  EXPECT_THROW(BenchmarkStatistic::parse("median"), ConfigError);
  EXPECT_THROW(BenchmarkStatistic::parse("quantile(1.5)"), ConfigError);
}

TEST(BenchmarkDelta, NoHeterogeneityInHeldOutColumns) {
  const Dataset d = bench_dataset(160000, 1, 0.0);
  const DeltaBenchmark b = benchmark_delta(d, 1, LearnerSpec{});
  ASSERT_EQ(b.subsets.size(), 2u);
  for (const auto& s : b.subsets) EXPECT_LT(s.value, 0.02);
  EXPECT_LT(b.delta_hat, 0.02);
  EXPECT_GE(b.delta_hat, 0.0);
}

TEST(BenchmarkDelta, DetectsHeldOutEffect) {
  const Dataset d = bench_dataset(160000, 2, 1.0);
  const DeltaBenchmark b = benchmark_delta(d, 1, LearnerSpec{});
  ASSERT_EQ(b.subsets.size(), 2u);
  EXPECT_EQ(b.subsets[0].held_out_names, std::vector<std::string>{"d1"});
  // |E[cate | c] - cate| = |d1 - 1/2| = 1/2 for every unit.
  EXPECT_NEAR(b.subsets[0].value, 0.5, 0.05);
  EXPECT_LT(b.subsets[1].value, 0.02);
  EXPECT_NEAR(b.delta_hat, 0.5 * (b.subsets[0].value + b.subsets[1].value), 1e-12);
  EXPECT_DOUBLE_EQ(b.min, b.subsets[1].value);
  EXPECT_DOUBLE_EQ(b.max, b.subsets[0].value);
}

TEST(BenchmarkDelta, AllDiscreteColumnsIsPointMass) {
  const Dataset d = bench_dataset(2000, 3, 1.0);
  const DeltaBenchmark b = benchmark_delta(d, 2, LearnerSpec{});
  ASSERT_EQ(b.subsets.size(), 1u);
  EXPECT_EQ(b.min, b.max);
  EXPECT_EQ(b.sd, 0.0);
  EXPECT_EQ(b.delta_hat, b.subsets[0].value);
}

TEST(BenchmarkDelta, SubsetCountIsBinomial) {
  const auto [d, t] = generate(ecotest::small_dgp(2000, 4));
  for (std::size_t k = 1; k <= 3; ++k) {
    EXPECT_EQ(benchmark_delta(d, k, LearnerSpec{}).subsets.size(), combinations(3, k).size());
  }
}

TEST(BenchmarkDelta, InvariantToColumnOrder) {
  const Dataset d = bench_dataset(3000, 5, 0.8);
  const Dataset p = reorder_columns(d, {2, 0, 1});
  const double a = benchmark_delta(d, 1, LearnerSpec{}).delta_hat;
  const double b = benchmark_delta(p, 1, LearnerSpec{}).delta_hat;
  EXPECT_NEAR(a, b, 1e-10);
}

TEST(BenchmarkDelta, MaxQuantileDominatesMeanAbs) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto [d, t] = generate(ecotest::small_dgp(2000, seed));
    const auto mean = benchmark_delta(d, 1, LearnerSpec{});
    const auto top = benchmark_delta(d, 1, LearnerSpec{}, BenchmarkStatistic::quantile_of(1.0));
    ASSERT_EQ(mean.subsets.size(), top.subsets.size());
    for (std::size_t i = 0; i < mean.subsets.size(); ++i) EXPECT_GE(top.subsets[i].value, mean.subsets[i].value);
    EXPECT_GE(top.delta_hat, mean.delta_hat);
  }
}

TEST(BenchmarkDelta, Errors) {
  const Dataset d = bench_dataset(500, 6, 0.0);
  EXPECT_THROW(benchmark_delta(d, 0, LearnerSpec{}), ConfigError);
  EXPECT_THROW(benchmark_delta(d, 3, LearnerSpec{}), ConfigError);
  Dataset cont = d;
  cont.columns.v_discrete = {false, false, false};
  EXPECT_THROW(benchmark_delta(cont, 1, LearnerSpec{}), ConfigError);
}

TEST(BenchmarkDelta, CsvLayout) {
  const Dataset d = bench_dataset(500, 7, 0.5);
  std::ostringstream csv;
  write_benchmark_csv(benchmark_delta(d, 1, LearnerSpec{}), csv);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "subset_id,held_out,statistic,value");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 12), "0,d1,mean-ab");
}
