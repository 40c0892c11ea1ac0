#include "ecobounds/inference.hpp"

#include <algorithm>
#include <cmath>

#include "ecobounds/error.hpp"
#include "ecobounds/parallel.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds {

std::vector<Interval> normal_intervals(const Vector& center, const Matrix& covariance, double z) {
  std::vector<Interval> out;
  for (Eigen::Index j = 0; j < center.size(); ++j) {
    const double se = std::sqrt(std::max(0.0, covariance(j, j)));
    out.push_back({center[j] - z * se, center[j] + z * se});
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

struct OuterAcc {
  Matrix m;
  std::size_t n = 0;

  OuterAcc operator+(const OuterAcc& o) const { return {m + o.m, n + o.n}; }
};

}  // namespace

CovarianceEstimate sandwich(const Dataset& d2, const BetaEstimate& beta_hat, const NuisanceSet& eta,
                            const ModelSpec& spec, IndicatorSource indicator) {
  const Design design(d2, spec);
  const auto p = static_cast<Eigen::Index>(design.dim());
  const OuterAcc zero{Matrix::Zero(p, p), 0};
  const OuterAcc total = chunked_sum(d2.size(), zero, [&](std::size_t b, std::size_t e) {
    OuterAcc acc = zero;
    for (std::size_t i = b; i < e; ++i) {
      const auto& s = d2.samples[i];
      if (!unit_contributes(s, design, beta_hat.kind)) continue;
      const Vector phi = unit_moment(s, beta_hat.beta, eta, design, beta_hat.kind, indicator);
      acc.m.selfadjointView<Eigen::Lower>().rankUpdate(phi);
      ++acc.n;
    }
    return acc;
  });
  if (total.n == 0) throw DataError("no units contribute to the moment");
  const double n = static_cast<double>(total.n);
  Matrix sigma = total.m / n;
  sigma.triangularView<Eigen::StrictlyUpper>() = sigma.transpose().triangularView<Eigen::StrictlyUpper>();
  const Matrix m = moment_jacobian(d2, beta_hat.beta, eta, spec, beta_hat.kind, indicator);
  const SolveResult a = solve_square(m, sigma);
  const Matrix at = a.x.transpose();
  const SolveResult b = solve_square(m, at);
  CovarianceEstimate out;
  out.method = CovarianceMethod::sandwich;
  out.covariance = 0.5 * (b.x + b.x.transpose()) / n;
  out.ridge_applied = a.ridged || b.ridged;
  out.intervals = normal_intervals(beta_hat.beta, out.covariance);
  return out;
}

std::vector<CovarianceEstimate> bootstrap_many(const Dataset& d, const std::vector<ModelSpec>& specs,
                                               const NuisanceLearners& learners, int replicates, std::uint64_t seed,
                                               CrossfitOptions options) {
  if (replicates < 100) throw ConfigError("bootstrap needs at least 100 replicates");
  if (specs.empty()) return {};
  const std::size_t n = d.size();
  const auto reps = static_cast<std::size_t>(replicates);
  std::vector<std::vector<Vector>> betas(reps);
  std::vector<int> retries(reps, 0);
  std::vector<bool> ok(reps, false);
  parallel_for(reps, [&](std::size_t r) {
    for (int attempt = 0; attempt <= 10; ++attempt) {
      Rng rng(derive_seed(seed, r, static_cast<std::uint64_t>(attempt)));
      std::vector<std::size_t> idx(n);
      for (auto& i : idx) i = rng.index(n);
      const Dataset resample = d.subset(idx);
      try {
        const auto folds = fit_folds(resample, learners, rng.next(), options.swap);
        std::vector<Vector> out;
        for (const auto& spec : specs) out.push_back(estimate_on_folds(folds, spec, options.kind, false).beta);
        betas[r] = std::move(out);
        ok[r] = true;
        return;
      } catch (const DataError&) {
        ++retries[r];
      }
    }
  });
  std::vector<CovarianceEstimate> out(specs.size());
  int total_retries = 0, failed = 0;
  for (std::size_t r = 0; r < reps; ++r) {
    total_retries += ok[r] ? retries[r] : retries[r] - 1;
    failed += ok[r] ? 0 : 1;
  }
  for (std::size_t k = 0; k < specs.size(); ++k) {
    std::vector<Vector> draws;
    for (std::size_t r = 0; r < reps; ++r) {
      if (ok[r]) draws.push_back(betas[r][k]);
    }
    if (draws.size() < 2) throw NumericalError("bootstrap produced fewer than two usable replicates");
    const Eigen::Index p = draws.front().size();
    Vector mean = Vector::Zero(p);
    for (const auto& b : draws) mean += b;
    mean /= static_cast<double>(draws.size());
    Matrix cov = Matrix::Zero(p, p);
    for (const auto& b : draws) cov += (b - mean) * (b - mean).transpose();
    cov /= static_cast<double>(draws.size() - 1);
    CovarianceEstimate& ce = out[k];
    ce.method = CovarianceMethod::bootstrap;
    ce.covariance = cov;
    ce.replicates = replicates;
    ce.retries = total_retries;
    ce.failed = failed;
    for (Eigen::Index j = 0; j < p; ++j) {
      std::vector<double> col;
      for (const auto& b : draws) col.push_back(b[j]);
      ce.intervals.push_back({quantile(col, 0.025), quantile(col, 0.975)});
    }
  }
  return out;
}

CovarianceEstimate bootstrap(const Dataset& d, const ModelSpec& spec, const NuisanceLearners& learners, int replicates,
                             std::uint64_t seed, CrossfitOptions options) {
  return bootstrap_many(d, {spec}, learners, replicates, seed, options).front();
}

}  // namespace ecobounds
