#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <vector>

#include "ecobounds/parallel.hpp"
#include "ecobounds/rng.hpp"

using namespace ecobounds;

namespace {

struct BudgetGuard {
  int saved = thread_budget();
  ~BudgetGuard() { set_thread_budget(saved); }
};

}  // namespace

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next(), b.next());
}

TEST(Rng, DerivedStreamsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(derive_seed(7, s));
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_NE(derive_seed(7, 1, 2), derive_seed(7, 2, 1));
}

TEST(Rng, UniformAndNormalMoments) {
  Rng r(3);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
}

TEST(Rng, IndexIsInRangeAndCoversAll) {
  Rng r(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = r.index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_GT(c, 800);
}

TEST(Parallel, ChunkedSumBitIdenticalAcrossThreadCounts) {
  BudgetGuard guard;
  std::vector<double> xs(10007);
  Rng r(5);
  for (auto& x : xs) x = r.normal() * 1e6;
  auto sum = [&]() {
    return chunked_sum(xs.size(), 0.0, [&](std::size_t b, std::size_t e) {
      double s = 0;
      for (std::size_t i = b; i < e; ++i) s += xs[i];
      return s;
    });
  };
  set_thread_budget(1);
  const double s1 = sum();
  for (int t : {2, 3, 8}) {
    set_thread_budget(t);
    EXPECT_EQ(sum(), s1) << t;
  }
}

TEST(Parallel, EveryIndexRunsOnce) {
  BudgetGuard guard;
  set_thread_budget(4);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { ++hits[i]; });
  for (int h : hits) ASSERT_EQ(h, 1);
}

TEST(Parallel, LowestFailingIndexIsRethrown) {
  BudgetGuard guard;
  set_thread_budget(4);
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "no exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}

TEST(Parallel, ThreadBudgetResolution) {
  EXPECT_EQ(resolve_thread_budget(3), 3);
  setenv("ECOBOUNDS_THREADS", "5", 1);
  EXPECT_EQ(resolve_thread_budget(std::nullopt), 5);
  EXPECT_EQ(resolve_thread_budget(2), 2);
  unsetenv("ECOBOUNDS_THREADS");
  EXPECT_GE(resolve_thread_budget(std::nullopt), 1);
}
