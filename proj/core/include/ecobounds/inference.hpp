#pragma once

#include <cstdint>
#include <vector>

#include "ecobounds/estimator.hpp"

namespace ecobounds {

// Normal-theory 95% intervals from a covariance and a centre.
std::vector<Interval> normal_intervals(const Vector& center, const Matrix& covariance, double z = 1.959963984540054);

CovarianceEstimate sandwich(const Dataset& d2, const BetaEstimate& beta_hat, const NuisanceSet& eta,
                            const ModelSpec& spec, IndicatorSource indicator = {});

// Empirical Jacobian of the mean moment in beta (the sandwich's M).
Matrix moment_jacobian(const Dataset& d2, const Vector& beta, const NuisanceSet& eta, const ModelSpec& spec,
                       EstimatorKind kind = EstimatorKind::bias_corrected, IndicatorSource indicator = {});

// Full-pipeline nonparametric bootstrap: each replicate resamples rows with
// replacement, refits the nuisances and re-solves. One estimate per spec,
// sharing the resamples and nuisance fits.
std::vector<CovarianceEstimate> bootstrap_many(const Dataset& d, const std::vector<ModelSpec>& specs,
                                               const NuisanceLearners& learners, int replicates, std::uint64_t seed,
                                               CrossfitOptions options = {});

CovarianceEstimate bootstrap(const Dataset& d, const ModelSpec& spec, const NuisanceLearners& learners, int replicates,
                             std::uint64_t seed, CrossfitOptions options = {});

// Type-7 sample quantile of unsorted values.
double quantile(std::vector<double> values, double q);

}  // namespace ecobounds
