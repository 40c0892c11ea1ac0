#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ecobounds/estimator.hpp"

namespace ecobounds {

struct RestrictedCateFit {
  Vector coef;        // on [1; v]
  Matrix covariance;  // HC0 sandwich of the second-stage regression
  Vector estimate;    // per dataset unit
  Vector se;
  std::vector<Interval> ci;
  double ate = 0.0;  // mean pseudo-outcome over study units
  double ate_se = 0.0;

  double predict(const Vector& v) const;
  Interval interval(const Vector& v, double z = 1.959963984540054) const;
};

// DR pseudo-outcome (A - pi)/(pi(1 - pi)) (Y - mu_A) + mu1 - mu0.
double dr_pseudo_outcome(double y, int a, double pi, double mu0, double mu1);

RestrictedCateFit fit_dr_restricted(const Dataset& d, const NuisanceLearners& learners, std::uint64_t seed);

// Second stage only, with given pseudo-outcomes for the study units in order.
RestrictedCateFit fit_dr_second_stage(const Dataset& d, const std::vector<double>& pseudo);

void write_restricted_csv(const RestrictedCateFit& fit, std::ostream& out);

}  // namespace ecobounds
