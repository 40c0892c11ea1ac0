#include <gtest/gtest.h>

#include <cmath>

#include "ecobounds/error.hpp"
#include "ecobounds/estimator.hpp"
#include "ecobounds/simulation.hpp"
#include "helpers.hpp"

using namespace ecobounds;

namespace {

NuisanceSet constant_eta(double mu0, double mu1, double rho0, double treat, Vector nu, OutcomeBounds b, double eps = 0.01) {
  const auto k = static_cast<std::size_t>(nu.size());
  return NuisanceSet([mu0](const Vector&) { return mu0; }, [mu1](const Vector&) { return mu1; },
                     [rho0](const Vector&) { return rho0; }, [treat](const Vector&) { return treat; },
                     [nu](const Vector&) { return nu; }, b, k, eps);
}

Dataset one_unit(double v, std::size_t w) {
  Dataset d = ecotest::toy_dataset(2, 1);
  d.samples.resize(1);
  d.samples[0].v = Vector::Constant(1, v);
  d.samples[0].w = w;
  return d;
}

}  // namespace

TEST(Indicator, HandValuesAndBoundaries) {
  const OutcomeBounds b{0, 1};
  EXPECT_EQ(indicator(-0.4, Side::lower, b), 1);
  EXPECT_EQ(indicator(-1.0, Side::lower, b), 1);
  EXPECT_EQ(indicator(-1.2, Side::lower, b), 0);
  EXPECT_EQ(indicator(1.6, Side::upper, b), 0);
  EXPECT_EQ(indicator(1.0, Side::upper, b), 1);
  EXPECT_EQ(indicator(0.3, Side::upper, b), 1);
}

TEST(InfluencePhi, HandEvaluatedTargetUnit) {
  // mu1 = 0.6, mu0 = 0.2, nu = (0.5, 0.5), rho0 = 0.5, [a,b] = [0,1], beta = 0.
  // tau_l = (0.4 - 0.5) / 0.5 = -0.2, active; d tau / d nu = (1 - 0.4) / 0.25 = 2.4.
  // nu correction: 0.5 * 2.4 * x(w) - 0.25 * 2.4 * (x(0) + x(1)); closing: -0.2 x(w).
  const double v = 0.7;
  const Dataset d = one_unit(v, 1);
  const NuisanceSet eta = constant_eta(0.2, 0.6, 0.5, 0.5, Vector::Constant(2, 0.5), d.bounds);
  ModelSpec spec;
  const Vector beta = Vector::Zero(3);
  const Vector phi = influence_phi(d.samples[0], beta, eta, d, spec);
  const Vector x1{{v, 1, 1}}, x0{{v, 0, 1}};
  const Vector expect = 1.2 * x1 - 0.6 * (x0 + x1) - 0.2 * x1;
  ASSERT_EQ(phi.size(), 3);
  EXPECT_LT((phi - expect).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(phi[0], -0.2 * v, 1e-12);
  EXPECT_NEAR(phi[1], 0.4, 1e-12);
  EXPECT_NEAR(phi[2], -0.2, 1e-12);

  spec.population = ProjectionPopulation::pooled;
  const Vector pooled = influence_phi(d.samples[0], beta, eta, d, spec);
  EXPECT_NEAR(pooled[0], -0.2 * v, 1e-12);
  EXPECT_NEAR(pooled[1], 1.0, 1e-12);
  EXPECT_NEAR(pooled[2], -0.2, 1e-12);
}

TEST(InfluencePhi, HandEvaluatedStudyUnit) {
  // Treated unit, y = 0.9: residual (0.9 - 0.6) / pi1 with pi1 = 0.5 * 0.5.
  // Target weighting multiplies by rho0; d gamma / d delta_mu = 1 / nu on each level.
  Dataset d = ecotest::toy_dataset(2, 1);
  d.samples.resize(2);
  ObservedSample& s = d.samples[1];
  s.v = Vector::Constant(1, 0.3);
  s.a = 1;
  s.y = 0.9;
  const NuisanceSet eta = constant_eta(0.2, 0.6, 0.5, 0.5, Vector::Constant(2, 0.5), d.bounds);
  const Vector x0{{0.3, 0, 1}}, x1{{0.3, 1, 1}};
  const Vector phi = influence_phi(s, Vector::Zero(3), eta, d, ModelSpec{});
  const Vector expect = 0.5 * 1.2 * (0.5 * 2.0 * x0 + 0.5 * 2.0 * x1);
  EXPECT_LT((phi - expect).cwiseAbs().maxCoeff(), 1e-12);

  s.y = 0.6;
  EXPECT_LT(influence_phi(s, Vector::Zero(3), eta, d, ModelSpec{}).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(InfluencePhi, ZeroIndicatorLeavesClosingTerm) {
  // delta_mu = -1 with nu = 0.5: tau_l = -3 < a - b, so the range piece is active.
  const Dataset d = one_unit(0.4, 0);
  const NuisanceSet eta = constant_eta(1.0, 0.0, 0.5, 0.5, Vector::Constant(2, 0.5), d.bounds);
  const Vector beta{{0.1, 0.2, 0.3}};
  const Vector x{{0.4, 0, 1}};
  const Vector phi = influence_phi(d.samples[0], beta, eta, d, ModelSpec{});
  EXPECT_LT((phi - x * (-1.0 - x.dot(beta))).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PluginBeta, RecoversLinearTarget) {
  // nu = 1/2 and delta_mu = 0.2 + 0.3 v give gamma_l = 2 delta_mu - 1 = -0.6 + 0.6 v.
  const Dataset d = ecotest::toy_dataset(400, 3);
  const NuisanceSet eta([](const Vector&) { return 0.2; }, [](const Vector& v) { return 0.4 + 0.3 * v[0]; },
                        [](const Vector&) { return 0.5; }, [](const Vector&) { return 0.5; },
                        [](const Vector&) { return Vector::Constant(2, 0.5); }, d.bounds, 2);
  const BetaEstimate b = plugin_beta(d, eta, ModelSpec{});
  EXPECT_NEAR(b.beta[0], 0.6, 1e-8);
  EXPECT_NEAR(b.beta[1], 0.0, 1e-8);
  EXPECT_NEAR(b.beta[2], -0.6, 1e-8);
  EXPECT_EQ(b.kind, EstimatorKind::plugin);
}

TEST(PluginBeta, ZeroIndicatorMatchesBiasCorrected) {
  const Dataset d = ecotest::toy_dataset(300, 4);
  const NuisanceSet eta = constant_eta(1.0, 0.0, 0.5, 0.5, Vector::Constant(2, 0.5), d.bounds);
  const BetaEstimate p = plugin_beta(d, eta, ModelSpec{});
  const BetaEstimate c = solve_bias_corrected(d, eta, ModelSpec{});
  EXPECT_NEAR(p.beta[0], 0.0, 1e-10);
  EXPECT_NEAR(p.beta[1], 0.0, 1e-10);
  EXPECT_NEAR(p.beta[2], -1.0, 1e-10);
  EXPECT_LT((p.beta - c.beta).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(PluginBeta, RankDeficientDesignIsRidged) {
  Dataset d = ecotest::toy_dataset(100, 4);
  for (auto& s : d.samples) s.v[0] = 0.5;
  const NuisanceSet eta = constant_eta(0.2, 0.6, 0.5, 0.5, Vector::Constant(2, 0.5), d.bounds);
  const BetaEstimate b = plugin_beta(d, eta, ModelSpec{});
  EXPECT_TRUE(b.ridge_applied);
  EXPECT_FALSE(b.warnings.empty());
  EXPECT_TRUE(b.beta.allFinite());
}

TEST(SolveBiasCorrected, MomentResidualOnFittedNuisances) {
  const auto [d, t] = generate(ecotest::small_dgp(3000, 5));
  const auto [d1, d2] = split(d, 0.5, 1);
  const NuisanceSet eta = fit_nuisances(d1, NuisanceLearners::parametric(1));
  for (Side side : {Side::lower, Side::upper}) {
    for (std::optional<double> delta : {std::optional<double>{}, std::optional<double>{1.0}}) {
      for (int degree : {0, 1, 2}) {
        for (auto pop : {ProjectionPopulation::target, ProjectionPopulation::pooled}) {
          ModelSpec spec;
          spec.side = side;
          spec.delta = delta;
          spec.degree = degree;
          spec.population = pop;
          const BetaEstimate b = solve_bias_corrected(d2, eta, spec);
          EXPECT_LT(b.moment_residual, 1e-8);
          const Design design(d2, spec);
          EXPECT_LT(max_abs(mean_phi(d2, b.beta, eta, design)), 1e-8);
        }
      }
    }
  }
}

TEST(SolveBiasCorrected, NeedsBothPopulations) {
  const Dataset d = ecotest::toy_dataset(40, 5);
  std::vector<std::size_t> target;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (!d.samples[i].e) target.push_back(i);
  const NuisanceSet eta = constant_eta(0.2, 0.6, 0.5, 0.5, Vector::Constant(2, 0.5), d.bounds);
  EXPECT_THROW(solve_bias_corrected(d.subset(target), eta, ModelSpec{}), DataError);
}

TEST(ModelSpec, CheckRejectsBadSettings) {
  ModelSpec spec;
  spec.delta = 2.0;
  EXPECT_THROW(spec.check({0, 1}), ConfigError);
  spec.delta = 0.5;
  spec.degree = -1;
  EXPECT_THROW(spec.check({0, 1}), ConfigError);
}

TEST(Design, WeightScalesGradient) {
  const Dataset d = ecotest::toy_dataset(200, 6);
  const NuisanceSet eta = constant_eta(0.3, 0.5, 0.5, 0.5, Vector::Constant(2, 0.5), d.bounds);
  ModelSpec spec;
  const BetaEstimate a = plugin_beta(d, eta, spec);
  spec.weight = [](const Vector&) { return 2.0; };
  const BetaEstimate b = plugin_beta(d, eta, spec);
  EXPECT_LT((a.beta - b.beta).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(MarginDiagnostic, PointMassAwayFromMargin) {
  const Dataset d = ecotest::toy_dataset(100, 7);
  const NuisanceSet eta = constant_eta(0.2, 0.6, 0.5, 0.5, Vector::Constant(2, 0.5), d.bounds);
  const auto m = margin_diagnostic(d, eta, Side::lower, {0.01, 0.1, 0.5});
  for (double f : m.fraction) EXPECT_EQ(f, 0.0);
  EXPECT_THROW(margin_diagnostic(d, eta, Side::lower, {}), ConfigError);
}

TEST(MarginDiagnostic, UniformMarginHasUnitSlope) {
  // One W level, so nu = 1 and tau_l + b - a = mu1 - mu0 + 2 = v on [0, 1].
  Dataset d;
  d.bounds = {0, 2};
  d.w_support = WSupport(std::vector<WLevel>{WLevel{0.0}});
  d.columns = {{"v"}, {false}, {"w"}};
  Rng r(8);
  for (int i = 0; i < 20000; ++i) {
    ObservedSample s;
    s.v = Vector::Constant(1, r.uniform());
    s.w = 0;
    d.samples.push_back(s);
  }
  const NuisanceSet eta([](const Vector&) { return 2.0; }, [](const Vector& v) { return v[0]; },
                        [](const Vector&) { return 0.5; }, [](const Vector&) { return 0.5; },
                        [](const Vector&) { return Vector::Ones(1); }, d.bounds, 1, 0.0);
  const std::vector<double> grid{0.05, 0.1, 0.2, 0.4, 0.8};
  const auto m = margin_diagnostic(d, eta, Side::lower, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(m.fraction[i], grid[i], 0.015);
  ASSERT_TRUE(m.alpha_hat);
  EXPECT_NEAR(*m.alpha_hat, 1.0, 0.05);
}

TEST(MarginDiagnostic, MonotoneOnSimulation) {
  const auto [d, t] = generate(ecotest::small_dgp(2000, 9));
  std::vector<double> grid;
  for (int i = 0; i <= 40; ++i) grid.push_back(i * 0.25);
  const auto m = margin_diagnostic(d, t.oracle, Side::lower, grid);
  for (std::size_t i = 1; i < grid.size(); ++i) EXPECT_GE(m.fraction[i], m.fraction[i - 1]);
}

TEST(Crossfit, DeterministicAndSwapAverages) {
  const auto [d, t] = generate(ecotest::small_dgp(2000, 10));
  const auto learners = NuisanceLearners::parametric(1);
  const BetaEstimate a = crossfit(d, ModelSpec{}, learners, 3);
  const BetaEstimate b = crossfit(d, ModelSpec{}, learners, 3);
  EXPECT_EQ(a.beta, b.beta);

  const auto folds = fit_folds(d, learners, 3, true);
  ASSERT_EQ(folds.size(), 2u);
  const Vector b0 = solve_bias_corrected(folds[0].solve_fold, folds[0].eta, ModelSpec{}).beta;
  const Vector b1 = solve_bias_corrected(folds[1].solve_fold, folds[1].eta, ModelSpec{}).beta;
  EXPECT_LT((a.beta - 0.5 * (b0 + b1)).cwiseAbs().maxCoeff(), 1e-12);

  CrossfitOptions one;
  one.swap = false;
  const BetaEstimate c = crossfit(d, ModelSpec{}, learners, 3, one);
  EXPECT_LT((c.beta - b0).cwiseAbs().maxCoeff(), 1e-12);
  one.folds = 3;
  EXPECT_THROW(crossfit(d, ModelSpec{}, learners, 3, one), ConfigError);
}

TEST(SolveBiasCorrected, RootNScalingAtOracleNuisances) {
  DgpConfig c = ecotest::small_dgp(10000, 0);
  c.coefficient_seed = 21;
  c.outcome_bounds = generate(c).first.bounds;
  const auto [d0, t0] = generate(c);
  const Vector oracle = oracle_beta(t0.model, d0.bounds, ModelSpec{}, 1000000, 3);
  double err_small = 0.0;
  double err_large = 0.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    c.seed = 1000 + s;
    c.n = 2500;
    const auto [d1, t1] = generate(c);
    err_small += (solve_bias_corrected(d1, t1.oracle, ModelSpec{}).beta - oracle).norm();
    c.n = 10000;
    const auto [d2, t2] = generate(c);
    err_large += (solve_bias_corrected(d2, t2.oracle, ModelSpec{}).beta - oracle).norm();
  }
  EXPECT_GE(err_small / err_large, 1.6);
  EXPECT_LE(err_small / err_large, 2.6);
}
