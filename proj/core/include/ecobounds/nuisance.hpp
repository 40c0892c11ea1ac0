#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ecobounds/data_model.hpp"
#include "ecobounds/linalg.hpp"

namespace ecobounds {

inline constexpr double kDefaultProbabilityClip = 0.01;
inline constexpr double kDefaultRidge = 1e-6;

enum class LearnerFamily { linear_least_squares, logistic, multinomial_logistic, kernel_smoother };

const char* to_string(LearnerFamily family);
LearnerFamily parse_learner_family(const std::string& name);

struct LearnerSpec {
  LearnerFamily family = LearnerFamily::linear_least_squares;
  int degree = 1;
  std::optional<double> regularization;  // default kDefaultRidge
  std::optional<double> bandwidth;       // kernel only; multiplier on per-coordinate sd

  void check() const;
  double ridge() const { return regularization ? *regularization : kDefaultRidge; }
  std::string fingerprint() const;
};

// One learner per nuisance role.
struct NuisanceLearners {
  LearnerSpec outcome{LearnerFamily::linear_least_squares, 1, std::nullopt, std::nullopt};
  LearnerSpec propensity{LearnerFamily::logistic, 1, std::nullopt, std::nullopt};
  LearnerSpec w_model{LearnerFamily::multinomial_logistic, 1, std::nullopt, std::nullopt};

  static NuisanceLearners parametric(int degree = 1);
  static NuisanceLearners kernel(std::optional<double> bandwidth = std::nullopt);
  // A kernel spec applies to every role; a parametric spec is mapped to the
  // matching parametric family per role, sharing degree and regularization.
  static NuisanceLearners from(const LearnerSpec& spec);
  std::string fingerprint() const;
};

using ScalarFn = std::function<double(const Vector&)>;
using LevelFn = std::function<Vector(const Vector&)>;

// All nuisance values at one v, after clipping and normalisation.
struct NuisancePoint {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double pi0 = 0.0;
  double pi1 = 0.0;
  double rho0 = 0.0;
  Vector nu;

  double delta_mu() const { return mu1 - mu0; }
  double study_treatment() const { return pi1 / (pi0 + pi1); }
};

enum class NuisanceComponent { mu0, mu1, rho0, treatment, nu };

const char* to_string(NuisanceComponent c);
NuisanceComponent parse_nuisance_component(const std::string& name);

// Immutable bundle of raw nuisance functions. Raw functions may return any
// value; evaluate() clips mu into [a,b], builds pi_a = (1 - rho0) P(A=a|V,E=1)
// and projects (rho0, pi0, pi1) and nu onto the clipped simplex.
class NuisanceSet {
 public:
  NuisanceSet() = default;
  NuisanceSet(ScalarFn mu0, ScalarFn mu1, ScalarFn rho0, ScalarFn treatment, LevelFn nu, OutcomeBounds bounds,
              std::size_t levels, double eps = kDefaultProbabilityClip);

  NuisancePoint evaluate(const Vector& v) const;
  double component(NuisanceComponent c, const Vector& v) const;  // clipped scalar; nu not allowed

  const ScalarFn& raw(NuisanceComponent c) const;
  const LevelFn& raw_nu() const { return nu_; }
  NuisanceSet with(NuisanceComponent c, ScalarFn f) const;
  NuisanceSet with_nu(LevelFn f) const;

  const OutcomeBounds& bounds() const { return bounds_; }
  std::size_t levels() const { return levels_; }
  double eps() const { return eps_; }

 private:
  ScalarFn mu0_, mu1_, rho0_, treatment_;
  LevelFn nu_;
  OutcomeBounds bounds_;
  std::size_t levels_ = 0;
  double eps_ = kDefaultProbabilityClip;
};

// Clips each entry into [eps, 1 - eps] and rescales the rest so the vector
// sums to one: entries that would fall below eps are pinned there.
void clip_to_simplex(double* p, std::size_t k, double eps);

struct OutcomeModels {
  ScalarFn mu0;
  ScalarFn mu1;
};

struct PropensityModels {
  ScalarFn rho0;       // P(E=0 | V)
  ScalarFn treatment;  // P(A=1 | V, E=1)

  // pi_a = (1 - rho0) P(A=a | V, E=1), after clipping with eps.
  double pi(int a, const Vector& v, double eps = kDefaultProbabilityClip) const;
};

OutcomeModels fit_outcome(const Dataset& d1, const LearnerSpec& spec);
PropensityModels fit_propensities(const Dataset& d1, const LearnerSpec& spec);
LevelFn fit_w_model(const Dataset& d1, const LearnerSpec& spec);
NuisanceSet fit_nuisances(const Dataset& d1, const NuisanceLearners& learners, double eps = kDefaultProbabilityClip);

// Fits a single regression of target on features of selected V columns, used
// by the DR baseline and benchmarking.
ScalarFn fit_regression(const std::vector<Vector>& v, const Vector& target, const LearnerSpec& spec);
ScalarFn fit_classifier(const std::vector<Vector>& v, const Vector& label, const LearnerSpec& spec);

enum class NoiseShape { constant_shift, smooth };

struct PerturbationSpec {
  std::vector<NuisanceComponent> targets;
  double magnitude = 0.0;
  NoiseShape shape = NoiseShape::constant_shift;
  std::uint64_t seed = 0;
  double sign = 1.0;
};

struct RealizedDeviation {
  NuisanceComponent component;
  double value;  // mean absolute deviation; total variation for nu
};

struct PerturbationResult {
  NuisanceSet eta;
  std::vector<RealizedDeviation> realized;
};

// reference: covariate values on which the realised deviation is measured
// and the smooth noise is normalised.
PerturbationResult perturb(const NuisanceSet& eta, const PerturbationSpec& spec, const std::vector<Vector>& reference);

}  // namespace ecobounds
