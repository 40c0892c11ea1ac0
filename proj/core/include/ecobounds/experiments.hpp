#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecobounds/estimator.hpp"
#include "ecobounds/json_io.hpp"
#include "ecobounds/simulation.hpp"

namespace ecobounds {

inline constexpr const char* kToolVersion = "ecobounds 0.1.0";

struct ResultRow {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string cell;
  std::string estimator;
  std::string metric;
  double value = 0.0;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<ResultRow> rows;
  Json metadata;  // config, per-seed coefficients, tool version

  // Values of one (cell, estimator, metric) across seeds, in seed order.
  std::vector<double> values(const std::string& cell, const std::string& estimator, const std::string& metric) const;
};

void write_results_csv(const ExperimentResult& r, std::ostream& out);

std::string cell_label(const std::string& key, double value);

struct ErrorGridOptions {
  std::vector<double> outcome_levels{0.0, 0.5, 1.0};
  std::vector<double> propensity_levels{0.0, 0.05, 0.1};
  std::vector<std::uint64_t> seeds{0};
  NoiseShape shape = NoiseShape::smooth;
  std::vector<NuisanceComponent> outcome_targets{NuisanceComponent::mu0, NuisanceComponent::mu1};
  std::vector<NuisanceComponent> propensity_targets{NuisanceComponent::rho0, NuisanceComponent::treatment};
  ModelSpec model;
  // If set, the model's delta is this multiple of each seed's true max delta.
  std::optional<double> relative_delta;
  std::size_t n_oracle = 200000;
  double eps = kDefaultProbabilityClip;
};

// One mad row per (cell, seed, estimator); cells are "eo=<x>;ep=<y>".
ExperimentResult run_error_grid(const DgpConfig& config, const ErrorGridOptions& options);

enum class NuisanceMode { oracle, fitted };

struct EntropySweepOptions {
  std::vector<double> scales{0.0, 0.5, 1.0, 2.0, 4.0};
  std::vector<std::uint64_t> seeds{0};
  NuisanceMode mode = NuisanceMode::oracle;
  std::optional<double> delta;
  NuisanceLearners learners;
};

double entropy(const Vector& p);

// Rows per (scale, seed): entropy (mean over target units of H(nu(v, .)) in
// nats) and width (mean over target units of the nu-weighted bound width at
// oracle nuisances, or of the fitted projection width at the observed W).
ExperimentResult run_entropy_sweep(const DgpConfig& config, const EntropySweepOptions& options);

struct DeltaSweepOptions {
  std::vector<double> deltas{0.0, 0.5, 1.0, 1.5};
  bool relative = true;  // deltas are multiples of the true max delta
  std::vector<std::uint64_t> seeds{0};
  NuisanceLearners learners;
  int degree = 1;
  CovarianceMethod inference = CovarianceMethod::sandwich;
  int replicates = 200;
};

// Per (delta, seed): ecological mean bounds with CIs, width and coverage of the
// fully conditional CATE on target units; the naive restricted-CATE +- delta
// band; and the DR baseline's CI coverage.
ExperimentResult run_delta_sweep(const DgpConfig& config, const DeltaSweepOptions& options);

// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ecobounds
