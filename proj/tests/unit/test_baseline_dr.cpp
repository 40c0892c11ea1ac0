#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ecobounds/baseline_dr.hpp"
#include "ecobounds/error.hpp"
#include "helpers.hpp"

using namespace ecobounds;

namespace {

// Two continuous V columns, all units in the study population except a
// small target block; CATE = 1 + 0.5 v1 - 0.25 v2.
Dataset linear_cate_dataset(std::size_t n, std::uint64_t seed, double noise, bool balanced = false) {
  Dataset d;
  d.bounds = {-50, 50};
  d.w_support = WSupport({{0.0}, {1.0}});
  d.columns = {{"v1", "v2"}, {false, false}, {"w"}};
  Rng r(seed);
  int parity = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ObservedSample s;
    s.v = Vector{{r.normal(), r.normal()}};
    s.e = i % 10 != 0;
    if (s.e) {
      s.a = balanced ? (parity++ % 2) : (r.bernoulli(0.5) ? 1 : 0);
      const double cate = 1.0 + 0.5 * s.v[0] - 0.25 * s.v[1];
      s.y = 2.0 + s.v[0] - s.v[1] + *s.a * cate + noise * r.normal();
    } else {
      s.w = r.index(2);
    }
    d.samples.push_back(s);
  }
  return d;
}

}  // namespace

TEST(DrPseudoOutcome, Formula) {
  EXPECT_DOUBLE_EQ(dr_pseudo_outcome(3.0, 1, 0.25, 1.0, 2.0), (0.75 / 0.1875) * 1.0 + 1.0);
  EXPECT_DOUBLE_EQ(dr_pseudo_outcome(3.0, 0, 0.25, 1.0, 2.0), (-0.25 / 0.1875) * 2.0 + 1.0);
}

TEST(DrPseudoOutcome, KnownHalfPropensityGivesDifferenceInMeans) {
  const Dataset d = linear_cate_dataset(2001, 1, 1.0, true);
  std::vector<double> pseudo;
  double s1 = 0, s0 = 0, n1 = 0, n0 = 0;
  for (const auto& s : d.samples) {
    if (!s.e) continue;
    pseudo.push_back(dr_pseudo_outcome(*s.y, *s.a, 0.5, 0.0, 0.0));
    (*s.a ? s1 : s0) += *s.y;
    (*s.a ? n1 : n0) += 1;
  }
  ASSERT_EQ(n1, n0);
  const RestrictedCateFit fit = fit_dr_second_stage(d, pseudo);
  EXPECT_NEAR(fit.ate, s1 / n1 - s0 / n0, 1e-10);
}

TEST(FitDrRestricted, RecoversLinearCate) {
  const Dataset d = linear_cate_dataset(11112, 2, 0.0);
  const RestrictedCateFit fit = fit_dr_restricted(d, NuisanceLearners::parametric(1), 3);
  ASSERT_EQ(fit.coef.size(), 3);
  EXPECT_NEAR(fit.coef[0], 1.0, 1e-3);
  EXPECT_NEAR(fit.coef[1], 0.5, 1e-3);
  EXPECT_NEAR(fit.coef[2], -0.25, 1e-3);
  EXPECT_NEAR(fit.predict(Vector{{1.0, 2.0}}), 1.0, 1e-3);
}

TEST(FitDrRestricted, IntervalsContainEstimates) {
  const Dataset d = linear_cate_dataset(3000, 4, 1.0);
  const RestrictedCateFit fit = fit_dr_restricted(d, NuisanceLearners::parametric(1), 5);
  ASSERT_EQ(fit.ci.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_LE(fit.ci[i].lower, fit.estimate[static_cast<Eigen::Index>(i)]);
    EXPECT_GE(fit.ci[i].upper, fit.estimate[static_cast<Eigen::Index>(i)]);
  }
  EXPECT_TRUE(is_psd(fit.covariance));
  std::ostringstream csv;
  write_restricted_csv(fit, csv);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "unit_id,estimate,se,ci_lower,ci_upper");
}

TEST(FitDrRestricted, DeterministicAndPositivity) {
  const Dataset d = linear_cate_dataset(1000, 6, 1.0);
  const auto a = fit_dr_restricted(d, NuisanceLearners::parametric(1), 9);
  const auto b = fit_dr_restricted(d, NuisanceLearners::parametric(1), 9);
  EXPECT_EQ(a.coef, b.coef);
  Dataset bad = d;
  for (auto& s : bad.samples)
    if (s.e) s.a = 0;
  EXPECT_THROW(fit_dr_restricted(bad, NuisanceLearners::parametric(1), 9), DataError);
}

TEST(DoubleRobustness, OneCorrectNuisanceSuffices) {
  // True ATE is 1 (E[v] = 0); propensity and outcome truths are known.
  const Dataset d = linear_cate_dataset(20000, 7, 1.0);
  std::vector<double> wrong_mu, wrong_pi;
  for (const auto& s : d.samples) {
    if (!s.e) continue;
    const double m0 = 2.0 + s.v[0] - s.v[1];
    const double m1 = m0 + 1.0 + 0.5 * s.v[0] - 0.25 * s.v[1];
    wrong_mu.push_back(dr_pseudo_outcome(*s.y, *s.a, 0.5, 0.0, 3.0 * s.v[0]));
    wrong_pi.push_back(dr_pseudo_outcome(*s.y, *s.a, 0.3, m0, m1));
  }
  const auto f1 = fit_dr_second_stage(d, wrong_mu);
  const auto f2 = fit_dr_second_stage(d, wrong_pi);
  EXPECT_LT(std::abs(f1.ate - 1.0), 3 * f1.ate_se);
  EXPECT_LT(std::abs(f2.ate - 1.0), 3 * f2.ate_se);
}
