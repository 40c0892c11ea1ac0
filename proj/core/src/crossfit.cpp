#include <algorithm>

#include "ecobounds/error.hpp"
#include "ecobounds/estimator.hpp"
#include "ecobounds/inference.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds {

std::vector<FoldFit> fit_folds(const Dataset& d, const NuisanceLearners& learners, std::uint64_t seed, bool swap) {
  auto halves = split(d, 0.5, seed);
  std::vector<FoldFit> folds;
  folds.push_back({halves.first, halves.second, fit_nuisances(halves.first, learners)});
  if (swap) folds.push_back({halves.second, halves.first, fit_nuisances(halves.second, learners)});
  return folds;
}

BetaEstimate estimate_on_folds(const std::vector<FoldFit>& folds, const ModelSpec& spec, EstimatorKind kind,
                               bool with_sandwich) {
  if (folds.empty()) throw ConfigError("no folds to estimate on");
  BetaEstimate out;
  Matrix cov_sum;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const FoldFit& fold = folds[f];
    BetaEstimate est = kind == EstimatorKind::plugin ? plugin_beta(fold.solve_fold, fold.eta, spec)
                                                     : solve_bias_corrected(fold.solve_fold, fold.eta, spec);
    if (f == 0) {
      out = est;
    } else {
      out.beta += est.beta;
      out.moment_residual = std::max(out.moment_residual, est.moment_residual);
      out.n_used += est.n_used;
      out.ridge_applied = out.ridge_applied || est.ridge_applied;
      for (auto& w : est.warnings) {
        if (std::find(out.warnings.begin(), out.warnings.end(), w) == out.warnings.end()) out.warnings.push_back(w);
      }
    }
    if (with_sandwich) {
      const CovarianceEstimate ce = sandwich(fold.solve_fold, est, fold.eta, spec);
      cov_sum = f == 0 ? ce.covariance : Matrix(cov_sum + ce.covariance);
      out.ridge_applied = out.ridge_applied || ce.ridge_applied;
    }
  }
  const double k = static_cast<double>(folds.size());
  out.beta /= k;
  if (with_sandwich) {
    CovarianceEstimate ce;
    ce.method = CovarianceMethod::sandwich;
    // Variance of the fold average over disjoint halves: sum / k^2.
    ce.covariance = cov_sum / (k * k);
    ce.intervals = normal_intervals(out.beta, ce.covariance);
    ce.ridge_applied = out.ridge_applied;
    out.covariance = ce;
  }
  return out;
}

BetaEstimate crossfit(const Dataset& d, const ModelSpec& spec, const NuisanceLearners& learners, std::uint64_t seed,
                      CrossfitOptions options) {
  if (options.folds != 2) throw ConfigError("cross-fitting supports exactly 2 folds");
  require_valid(d);
  const auto folds = fit_folds(d, learners, seed, options.swap);
  BetaEstimate est = estimate_on_folds(folds, spec, options.kind, options.sandwich);
  est.seed = seed;
  est.learner_fingerprint = learners.fingerprint();
  return est;
}

}  // namespace ecobounds
