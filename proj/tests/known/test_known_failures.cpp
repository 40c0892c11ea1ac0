// Examples whose stated tolerance is below the sampling noise of the default
// simulation; registered as expected failures.
#include <gtest/gtest.h>

#include <cmath>

#include "ecobounds/estimator.hpp"
#include "ecobounds/experiments.hpp"
#include "ecobounds/simulation.hpp"

namespace {

using namespace ecobounds;

TEST(KnownFailure, PluginAtOracleNuisancesWithinTenthOfOracle) {
  DgpConfig c;
  c.n = 10000;
  c.seed = 11;
  const auto [d, t] = generate(c);
  const Vector oracle = oracle_beta(t.model, d.bounds, ModelSpec{}, 1000000, 5);
  const BetaEstimate b = plugin_beta(d, t.oracle, ModelSpec{});
  EXPECT_LT((b.beta - oracle).cwiseAbs().maxCoeff(), 0.1);
}

TEST(KnownFailure, DoublingOracleDrawsMovesLessThanHundredth) {
  DgpConfig c;
  c.n = 1000;
  c.seed = 7;
  const auto [d, t] = generate(c);
  const Vector a = oracle_beta(t.model, d.bounds, ModelSpec{}, 1000000, 1);
  const Vector b = oracle_beta(t.model, d.bounds, ModelSpec{}, 2000000, 1);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-2);
}

TEST(KnownFailure, ErrorGridZeroCellEstimatorsWithinTwoSe) {
  ErrorGridOptions o;
  o.outcome_levels = {0.0};
  o.propensity_levels = {0.0};
  o.relative_delta = 1.0;
  o.seeds.clear();
  for (std::uint64_t s = 0; s < 20; ++s) o.seeds.push_back(s);
  const ExperimentResult r = run_error_grid(DgpConfig{}, o);
  const std::string cell = cell_label("eo", 0.0) + ";" + cell_label("ep", 0.0);
  const auto p = r.values(cell, "plugin", "mad");
  const auto b = r.values(cell, "bias_corrected", "mad");
  ASSERT_EQ(p.size(), b.size());
  const auto n = static_cast<double>(p.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) mean += (b[i] - p[i]) / n;
  double var = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) var += (b[i] - p[i] - mean) * (b[i] - p[i] - mean) / (n - 1);
  EXPECT_LE(std::abs(mean), 2.0 * std::sqrt(var / n));
}

}  // namespace
