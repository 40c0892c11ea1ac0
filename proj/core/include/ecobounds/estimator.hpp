#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ecobounds/data_model.hpp"
#include "ecobounds/learners.hpp"
#include "ecobounds/nuisance.hpp"

namespace ecobounds {

enum class Side { lower, upper };
const char* to_string(Side side);
Side parse_side(const std::string& name);

// Population over which the projection of the bound is defined.
// target: E=0 covariate distribution (default); pooled: all units, with the
// bound averaged over nu for study units.
enum class ProjectionPopulation { target, pooled };
const char* to_string(ProjectionPopulation p);
ProjectionPopulation parse_population(const std::string& name);

// A differentiable projection model m(x; beta) for the Gauss-Newton path.
class ProjectionModel {
 public:
  virtual ~ProjectionModel() = default;
  virtual std::size_t dim(std::size_t x_dim) const = 0;
  virtual double value(const Vector& x, const Vector& beta) const = 0;
  virtual Vector gradient(const Vector& x, const Vector& beta) const = 0;
};

struct ModelSpec {
  Side side = Side::lower;
  std::optional<double> delta;
  // Basis on x: 0 is the constant model (the mean bound), 1 is x itself,
  // k >= 2 adds powers up to k of the non-binary coordinates.
  int degree = 1;
  bool intercept = true;
  std::function<double(const Vector& x)> weight;  // h(X); empty means 1
  ProjectionPopulation population = ProjectionPopulation::target;
  std::shared_ptr<const ProjectionModel> nonlinear;

  void check(const OutcomeBounds& bounds) const;
};

// Encoder, basis and weight bound to one dataset and model spec.
class Design {
 public:
  Design(const Dataset& dataset, const ModelSpec& spec);

  const ModelSpec& spec() const { return spec_; }
  const OutcomeBounds& bounds() const { return bounds_; }
  std::size_t levels() const { return levels_; }
  std::size_t x_dim() const { return encoder_.dim(); }
  std::size_t dim() const { return dim_; }
  bool linear() const { return !spec_.nonlinear; }

  void x(const Vector& v, std::size_t w, Vector& out) const;
  void basis(const Vector& x, Vector& out) const;
  double weight(const Vector& x) const { return spec_.weight ? spec_.weight(x) : 1.0; }
  double model(const Vector& x, const Vector& beta) const;
  void model_gradient(const Vector& x, const Vector& beta, Vector& out) const;

 private:
  ModelSpec spec_;
  OutcomeBounds bounds_;
  std::size_t levels_;
  CovariateEncoder encoder_;
  std::vector<bool> binary_;
  std::size_t dim_;
};

// Which branch of the (possibly sensitivity-tightened) bound is active.
enum class BoundPiece { tau, range, tau_delta, contrast_delta };

struct PieceValue {
  double value = 0.0;
  double d_delta_mu = 0.0;
  double d_nu = 0.0;
};

// Active piece at (delta_mu, nu): the max (lower) or min (upper) over the
// candidate pieces. Ties resolve to the earlier of tau_delta, contrast_delta,
// tau, range, so without delta the closed inequalities hold. tau_shift is
// added to the tau pieces before comparison.
BoundPiece select_piece(Side side, std::optional<double> delta, double delta_mu, double nu,
                        const OutcomeBounds& bounds, double tau_shift = 0.0);
PieceValue evaluate_piece(BoundPiece piece, Side side, std::optional<double> delta, double delta_mu, double nu,
                          const OutcomeBounds& bounds);

// Lower: 1 iff tau + b - a >= 0. Upper: 1 iff tau + a - b <= 0.
int indicator(double tau_hat, Side side, const OutcomeBounds& bounds);

// f(v, w) built from a nuisance set: 1 iff the active piece is not the
// constant range clip.
class IndicatorFn {
 public:
  IndicatorFn(NuisanceSet eta, Side side, std::optional<double> delta, OutcomeBounds bounds, double tau_shift = 0.0);
  int operator()(const Vector& v, std::size_t w) const;
  BoundPiece piece(const Vector& v, std::size_t w) const;

 private:
  NuisanceSet eta_;
  Side side_;
  std::optional<double> delta_;
  OutcomeBounds bounds_;
  double shift_;
};

struct MarginDiagnostic {
  std::vector<double> t;
  std::vector<double> fraction;
  std::optional<double> alpha_hat;  // log-log slope over grid points with positive fraction
};

MarginDiagnostic margin_diagnostic(const Dataset& d, const NuisanceSet& eta, Side side, const std::vector<double>& t_grid);

enum class EstimatorKind { plugin, bias_corrected };
const char* to_string(EstimatorKind k);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

enum class CovarianceMethod { sandwich, bootstrap };
const char* to_string(CovarianceMethod m);

struct CovarianceEstimate {
  CovarianceMethod method = CovarianceMethod::sandwich;
  Matrix covariance;
  std::vector<Interval> intervals;
  std::optional<int> replicates;
  int retries = 0;
  int failed = 0;
  bool ridge_applied = false;
};

struct BetaEstimate {
  Vector beta;
  Side side = Side::lower;
  std::optional<double> delta;
  EstimatorKind kind = EstimatorKind::bias_corrected;
  double moment_residual = 0.0;
  std::size_t n_used = 0;
  std::optional<CovarianceEstimate> covariance;
  std::optional<std::uint64_t> seed;
  std::string learner_fingerprint;
  bool ridge_applied = false;
  std::vector<std::string> warnings;
};

// Optional override of the nuisances used to pick the active piece.
struct IndicatorSource {
  const NuisanceSet* eta = nullptr;
  double tau_shift = 0.0;
};

Vector influence_phi(const ObservedSample& sample, const Vector& beta, const NuisanceSet& eta, const Design& design,
                     IndicatorSource indicator = {});
Vector influence_phi(const ObservedSample& sample, const Vector& beta, const NuisanceSet& eta, const Dataset& dataset,
                     const ModelSpec& spec);

// One unit's term in the estimating equation of the given kind; zero for
// units outside the estimator's population.
bool unit_contributes(const ObservedSample& sample, const Design& design, EstimatorKind kind);
Vector unit_moment(const ObservedSample& sample, const Vector& beta, const NuisanceSet& eta, const Design& design,
                   EstimatorKind kind, IndicatorSource indicator = {});

// Mean of phi over the dataset at beta, with the deterministic reduction.
Vector mean_phi(const Dataset& d, const Vector& beta, const NuisanceSet& eta, const Design& design,
                IndicatorSource indicator = {});

BetaEstimate plugin_beta(const Dataset& d, const NuisanceSet& eta, const ModelSpec& spec, IndicatorSource indicator = {});
BetaEstimate solve_bias_corrected(const Dataset& d2, const NuisanceSet& eta, const ModelSpec& spec,
                                  IndicatorSource indicator = {});

// For linear m, phi(beta) = c - S beta summed over units; returns the means
// of c and S. Shared by the solver and the sandwich.
struct AffineMoment {
  Vector c;
  Matrix s;
  std::size_t n_used = 0;
};
AffineMoment affine_moment(const Dataset& d, const NuisanceSet& eta, const Design& design, EstimatorKind kind,
                           IndicatorSource indicator = {});

struct FoldFit {
  Dataset nuisance_fold;
  Dataset solve_fold;
  NuisanceSet eta;
};

// Splits in half with the seed and fits nuisances on each nuisance fold;
// two folds when swap is on, one otherwise.
std::vector<FoldFit> fit_folds(const Dataset& d, const NuisanceLearners& learners, std::uint64_t seed, bool swap = true);

struct CrossfitOptions {
  int folds = 2;
  bool swap = true;
  EstimatorKind kind = EstimatorKind::bias_corrected;
  bool sandwich = false;
};

BetaEstimate estimate_on_folds(const std::vector<FoldFit>& folds, const ModelSpec& spec, EstimatorKind kind,
                               bool with_sandwich);

BetaEstimate crossfit(const Dataset& d, const ModelSpec& spec, const NuisanceLearners& learners, std::uint64_t seed,
                      CrossfitOptions options = {});

}  // namespace ecobounds
