#include "ecobounds/baseline_dr.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ecobounds/error.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds {

namespace {

Vector with_intercept(const Vector& v) {
  Vector x(v.size() + 1);
  x[0] = 1.0;
  x.tail(v.size()) = v;
  return x;
}

}  // namespace

double RestrictedCateFit::predict(const Vector& v) const { return with_intercept(v).dot(coef); }

Interval RestrictedCateFit::interval(const Vector& v, double z) const {
  const Vector x = with_intercept(v);
  const double est = x.dot(coef);
  const double s = std::sqrt(std::max(0.0, x.dot(covariance * x)));
  return {est - z * s, est + z * s};
}

double dr_pseudo_outcome(double y, int a, double pi, double mu0, double mu1) {
  const double mu_a = a == 1 ? mu1 : mu0;
  return (static_cast<double>(a) - pi) / (pi * (1.0 - pi)) * (y - mu_a) + mu1 - mu0;
}

RestrictedCateFit fit_dr_second_stage(const Dataset& d, const std::vector<double>& pseudo) {
  std::vector<Vector> xs;
  for (const auto& s : d.samples) {
    if (s.e) xs.push_back(with_intercept(s.v));
  }
  if (xs.size() != pseudo.size()) throw DataError("pseudo-outcome count does not match study units");
  if (xs.empty()) throw DataError("no study units for the DR baseline");
  const Eigen::Index p = xs.front().size();
  const double n = static_cast<double>(xs.size());
  Matrix gram = Matrix::Zero(p, p);
  Vector rhs = Vector::Zero(p);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    gram += xs[i] * xs[i].transpose();
    rhs += xs[i] * pseudo[i];
  }
  gram /= n;
  rhs /= n;
  RestrictedCateFit fit;
  fit.coef = solve_square(gram, rhs).x.col(0);
  Matrix meat = Matrix::Zero(p, p);
  double mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = pseudo[i] - xs[i].dot(fit.coef);
    meat += (r * r) * xs[i] * xs[i].transpose();
    mean += pseudo[i];
  }
  meat /= n;
  mean /= n;
  const Matrix a = solve_square(gram, meat).x;
  const Matrix cov = solve_square(gram, Matrix(a.transpose())).x / n;
  fit.covariance = 0.5 * (cov + cov.transpose());
  double var = 0.0;
  for (double v : pseudo) var += (v - mean) * (v - mean);
  fit.ate = mean;
  fit.ate_se = std::sqrt(var / (n - 1.0) / n);
  fit.estimate.resize(static_cast<Eigen::Index>(d.size()));
  fit.se.resize(static_cast<Eigen::Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i) {
    const Vector x = with_intercept(d.samples[i].v);
    fit.estimate[static_cast<Eigen::Index>(i)] = x.dot(fit.coef);
    fit.se[static_cast<Eigen::Index>(i)] = std::sqrt(std::max(0.0, x.dot(fit.covariance * x)));
    fit.ci.push_back(fit.interval(d.samples[i].v));
  }
  return fit;
}

RestrictedCateFit fit_dr_restricted(const Dataset& d, const NuisanceLearners& learners, std::uint64_t seed) {
  std::vector<std::size_t> study;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d.samples[i].e) study.push_back(i);
  }
  if (study.size() < 4) throw DataError("positivity violation in sample");
  std::vector<std::size_t> perm = study;
  Rng rng(seed);
  for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
  const std::size_t half = perm.size() / 2;
  std::vector<std::vector<std::size_t>> folds{{perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half)},
                                              {perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end()}};
  std::vector<double> pseudo_by_index(d.size(), 0.0);
  for (int f = 0; f < 2; ++f) {
    const auto& train_idx = folds[static_cast<std::size_t>(f)];
    const auto& eval_idx = folds[static_cast<std::size_t>(1 - f)];
    const Dataset train = d.subset(train_idx);
    const OutcomeModels mu = fit_outcome(train, learners.outcome);
    std::vector<Vector> v;
    std::vector<double> arm;
    for (const auto& s : train.samples) {
      v.push_back(s.v);
      arm.push_back(static_cast<double>(*s.a));
    }
    const double treated = std::count(arm.begin(), arm.end(), 1.0);
    if (treated == 0 || treated == static_cast<double>(arm.size())) throw DataError("positivity violation in sample");
    const ScalarFn pi =
        fit_classifier(v, Eigen::Map<const Vector>(arm.data(), static_cast<Eigen::Index>(arm.size())), learners.propensity);
    for (std::size_t i : eval_idx) {
      const auto& s = d.samples[i];
      const double p = std::clamp(pi(s.v), kDefaultProbabilityClip, 1.0 - kDefaultProbabilityClip);
      const double m0 = std::clamp(mu.mu0(s.v), d.bounds.a, d.bounds.b);
      const double m1 = std::clamp(mu.mu1(s.v), d.bounds.a, d.bounds.b);
      pseudo_by_index[i] = dr_pseudo_outcome(*s.y, *s.a, p, m0, m1);
    }
  }
  std::vector<double> pseudo;
  for (std::size_t i : study) pseudo.push_back(pseudo_by_index[i]);
  return fit_dr_second_stage(d, pseudo);
}

void write_restricted_csv(const RestrictedCateFit& fit, std::ostream& out) {
  out << "unit_id,estimate,se,ci_lower,ci_upper\n";
  for (Eigen::Index i = 0; i < fit.estimate.size(); ++i) {
    out << i << ',' << format_double(fit.estimate[i]) << ',' << format_double(fit.se[i]) << ','
        << format_double(fit.ci[static_cast<std::size_t>(i)].lower) << ','
        << format_double(fit.ci[static_cast<std::size_t>(i)].upper) << '\n';
  }
}

}  // namespace ecobounds
