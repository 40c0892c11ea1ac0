#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ecobounds/data_model.hpp"
#include "ecobounds/estimator.hpp"
#include "ecobounds/nuisance.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds {

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;
};

struct DgpConfig {
  std::size_t n = 10000;
  std::size_t n_continuous = 3;
  std::size_t n_discrete = 3;
  std::size_t n_w = 3;
  double continuous_mean = 1.0;
  double continuous_sd = 0.5;
  double discrete_p = 0.5;
  UniformRange w_coef{-1.0, 1.0};
  UniformRange e_coef{-1.0, 1.0};
  UniformRange a_coef{-1.0, 1.0};
  UniformRange effect_coef{0.0, 1.5};
  UniformRange outcome_coef{1.0, 3.0};
  double noise_sd = 1.0;
  std::uint64_t seed = 0;
  // Seed for the coefficient draw; defaults to a stream of seed.
  std::optional<std::uint64_t> coefficient_seed;
  double w_dependence_scale = 1.0;  // multiplies the W logistic coefficients
  double w_effect_scale = 1.0;      // multiplies alpha_W
  // Fixed outcome bounds; otherwise the potential-outcome range plus bound_slack
  // of the range on each side.
  std::optional<OutcomeBounds> outcome_bounds;
  double bound_slack = 0.01;

  void check() const;
  std::size_t dim_v() const { return n_continuous + n_discrete; }
};

struct DgpCoefficients {
  Matrix w_logit;  // n_w x dim_v
  Vector e_logit;
  Vector a_logit;
  Vector effect_v;
  Vector effect_w;
  Vector outcome_v;
  Vector outcome_w;
};

DgpCoefficients draw_coefficients(const DgpConfig& config);

// Closed-form truth for one coefficient draw.
class DgpModel {
 public:
  DgpModel(DgpConfig config, DgpCoefficients coefficients);
  const DgpConfig& config() const { return config_; }
  const DgpCoefficients& coefficients() const { return coef_; }
  const WSupport& support() const { return support_; }

  Vector draw_v(Rng& rng) const;
  Vector w_probabilities(const Vector& v) const;
  Vector nu(const Vector& v) const;  // P(W = level | V), support order
  double rho0(const Vector& v) const;
  double treatment(const Vector& v) const;
  double mu(int a, const Vector& v) const;
  double cate(const Vector& v, const WLevel& w) const;
  double restricted_cate(const Vector& v) const;

  NuisanceSet nuisances(const OutcomeBounds& bounds, double eps = 1e-9) const;

 private:
  DgpConfig config_;
  DgpCoefficients coef_;
  WSupport support_;
};

struct GroundTruth {
  std::vector<double> cate;        // fully conditional, every unit
  std::vector<double> restricted;  // E[cate | V]
  std::vector<double> y1;
  std::vector<double> y0;
  std::vector<std::size_t> w_index;
  std::vector<int> a;
  double true_delta_max = 0.0;   // over target units
  double true_delta_mean = 0.0;
  std::size_t clamped = 0;  // outcomes clamped into fixed bounds
  DgpModel model;
  NuisanceSet oracle;
};

std::pair<Dataset, GroundTruth> generate(const DgpConfig& config);

// Potential-outcome range of a large draw with the given slack.
OutcomeBounds reference_bounds(const DgpConfig& config, std::size_t draws = 1000000, double slack = 0.01);

// True bound at (v, w) under the model with the spec's side and delta.
double true_gamma(const DgpModel& model, const OutcomeBounds& bounds, const ModelSpec& spec, const Vector& v,
                  std::size_t w);

// Weighted least-squares projection of the true bound onto the spec's
// linear model class. v is drawn from the full V law and weighted by rho0
// (target) or 1 (pooled); W is summed out with weights nu.
Vector oracle_beta(const DgpModel& model, const OutcomeBounds& bounds, const ModelSpec& spec, std::size_t n_oracle,
                   std::uint64_t seed);
Vector oracle_beta(const DgpConfig& config, const ModelSpec& spec, std::size_t n_oracle);

}  // namespace ecobounds
