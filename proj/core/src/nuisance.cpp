#include "ecobounds/nuisance.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "ecobounds/error.hpp"
#include "ecobounds/learners.hpp"

namespace ecobounds {

const char* to_string(LearnerFamily family) {
  switch (family) {
    case LearnerFamily::linear_least_squares:
      return "linear-least-squares";
    case LearnerFamily::logistic:
      return "logistic";
    case LearnerFamily::multinomial_logistic:
      return "multinomial-logistic";
    case LearnerFamily::kernel_smoother:
      return "kernel-smoother";
  }
  return "unknown";
}

LearnerFamily parse_learner_family(const std::string& name) {
  if (name == "linear-least-squares") return LearnerFamily::linear_least_squares;
  if (name == "logistic") return LearnerFamily::logistic;
  if (name == "multinomial-logistic") return LearnerFamily::multinomial_logistic;
  if (name == "kernel-smoother") return LearnerFamily::kernel_smoother;
  throw ConfigError("unknown learner family '" + name + "'");
}

void LearnerSpec::check() const {
  if (degree < 1) throw ConfigError("learner degree must be >= 1");
  if (regularization && *regularization < 0.0) throw ConfigError("learner regularization must be >= 0");
  if (bandwidth && !(*bandwidth > 0.0)) throw ConfigError("kernel bandwidth must be > 0");
}

std::string LearnerSpec::fingerprint() const {
  std::ostringstream s;
  s << to_string(family) << "(degree=" << degree;
  if (regularization) s << ",ridge=" << format_double(*regularization);
  if (bandwidth) s << ",bandwidth=" << format_double(*bandwidth);
  s << ")";
  return s.str();
}

NuisanceLearners NuisanceLearners::parametric(int degree) {
  NuisanceLearners l;
  l.outcome.degree = l.propensity.degree = l.w_model.degree = degree;
  return l;
}

NuisanceLearners NuisanceLearners::kernel(std::optional<double> bandwidth) {
  NuisanceLearners l;
  for (LearnerSpec* s : {&l.outcome, &l.propensity, &l.w_model}) {
    s->family = LearnerFamily::kernel_smoother;
    s->bandwidth = bandwidth;
  }
  return l;
}

NuisanceLearners NuisanceLearners::from(const LearnerSpec& spec) {
  spec.check();
  if (spec.family == LearnerFamily::kernel_smoother) return kernel(spec.bandwidth);
  NuisanceLearners l = parametric(spec.degree);
  for (LearnerSpec* s : {&l.outcome, &l.propensity, &l.w_model}) s->regularization = spec.regularization;
  return l;
}

std::string NuisanceLearners::fingerprint() const {
  return "outcome=" + outcome.fingerprint() + ";propensity=" + propensity.fingerprint() +
         ";w_model=" + w_model.fingerprint();
}

const char* to_string(NuisanceComponent c) {
  switch (c) {
    case NuisanceComponent::mu0:
      return "mu0";
    case NuisanceComponent::mu1:
      return "mu1";
    case NuisanceComponent::rho0:
      return "rho0";
    case NuisanceComponent::treatment:
      return "treatment";
    case NuisanceComponent::nu:
      return "nu";
  }
  return "unknown";
}

NuisanceComponent parse_nuisance_component(const std::string& name) {
  if (name == "mu0") return NuisanceComponent::mu0;
  if (name == "mu1") return NuisanceComponent::mu1;
  if (name == "rho0") return NuisanceComponent::rho0;
  if (name == "treatment" || name == "pi" || name == "pi0" || name == "pi1") return NuisanceComponent::treatment;
  if (name == "nu") return NuisanceComponent::nu;
  throw ConfigError("unknown nuisance component '" + name + "'");
}

void clip_to_simplex(double* p, std::size_t k, double eps) {
  if (k == 0) return;
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(p[i] > 0.0)) p[i] = 0.0;
    total += p[i];
  }
  if (!(total > 0.0) || !std::isfinite(total)) {
    for (std::size_t i = 0; i < k; ++i) p[i] = 1.0 / static_cast<double>(k);
    total = 1.0;
  }
  if (k == 1) {
    p[0] = 1.0;
    return;
  }
  for (std::size_t i = 0; i < k; ++i) p[i] /= total;
  if (eps <= 0.0) return;
  std::vector<bool> pinned(k, false);
  for (std::size_t round = 0; round <= k; ++round) {
    double free_raw = 0.0;
    std::size_t n_pinned = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i]) {
        ++n_pinned;
      } else {
        free_raw += p[i];
      }
    }
    const double free_mass = 1.0 - static_cast<double>(n_pinned) * eps;
    bool changed = false;
    for (std::size_t i = 0; i < k; ++i) {
      if (pinned[i]) continue;
      const double scaled = free_raw > 0.0 ? p[i] * free_mass / free_raw : free_mass;
      if (scaled < eps) {
        pinned[i] = true;
        changed = true;
      }
    }
    if (!changed) {
      for (std::size_t i = 0; i < k; ++i) {
        p[i] = pinned[i] ? eps : (free_raw > 0.0 ? p[i] * free_mass / free_raw : free_mass);
      }
      return;
    }
  }
}

NuisanceSet::NuisanceSet(ScalarFn mu0, ScalarFn mu1, ScalarFn rho0, ScalarFn treatment, LevelFn nu,
                         OutcomeBounds bounds, std::size_t levels, double eps)
    : mu0_(std::move(mu0)),
      mu1_(std::move(mu1)),
      rho0_(std::move(rho0)),
      treatment_(std::move(treatment)),
      nu_(std::move(nu)),
      bounds_(bounds),
      levels_(levels),
      eps_(eps) {
  if (!(eps_ >= 0.0 && eps_ < 0.5)) throw ConfigError("probability clip must lie in [0, 0.5)");
  if (levels_ > 0 && static_cast<double>(levels_) * eps_ > 1.0) throw ConfigError("probability clip too large for W support");
}

NuisancePoint NuisanceSet::evaluate(const Vector& v) const {
  NuisancePoint p;
  p.mu0 = std::clamp(mu0_(v), bounds_.a, bounds_.b);
  p.mu1 = std::clamp(mu1_(v), bounds_.a, bounds_.b);
  const double r = std::clamp(rho0_(v), 0.0, 1.0);
  const double t = std::clamp(treatment_(v), 0.0, 1.0);
  double tri[3] = {r, (1.0 - r) * (1.0 - t), (1.0 - r) * t};
  clip_to_simplex(tri, 3, eps_);
  p.rho0 = tri[0];
  p.pi0 = tri[1];
  p.pi1 = tri[2];
  p.nu = nu_(v);
  if (static_cast<std::size_t>(p.nu.size()) != levels_) throw NumericalError("W model returned wrong number of levels");
  clip_to_simplex(p.nu.data(), levels_, eps_);
  return p;
}

double NuisanceSet::component(NuisanceComponent c, const Vector& v) const {
  const NuisancePoint p = evaluate(v);
  switch (c) {
    case NuisanceComponent::mu0:
      return p.mu0;
    case NuisanceComponent::mu1:
      return p.mu1;
    case NuisanceComponent::rho0:
      return p.rho0;
    case NuisanceComponent::treatment:
      return p.study_treatment();
    case NuisanceComponent::nu:
      break;
  }
  throw ConfigError("nu is not a scalar component");
}

const ScalarFn& NuisanceSet::raw(NuisanceComponent c) const {
  switch (c) {
    case NuisanceComponent::mu0:
      return mu0_;
    case NuisanceComponent::mu1:
      return mu1_;
    case NuisanceComponent::rho0:
      return rho0_;
    case NuisanceComponent::treatment:
      return treatment_;
    case NuisanceComponent::nu:
      break;
  }
  throw ConfigError("nu is not a scalar component");
}

NuisanceSet NuisanceSet::with(NuisanceComponent c, ScalarFn f) const {
  NuisanceSet out = *this;
  switch (c) {
    case NuisanceComponent::mu0:
      out.mu0_ = std::move(f);
      break;
    case NuisanceComponent::mu1:
      out.mu1_ = std::move(f);
      break;
    case NuisanceComponent::rho0:
      out.rho0_ = std::move(f);
      break;
    case NuisanceComponent::treatment:
      out.treatment_ = std::move(f);
      break;
    case NuisanceComponent::nu:
      throw ConfigError("use with_nu for the W model");
  }
  return out;
}

NuisanceSet NuisanceSet::with_nu(LevelFn f) const {
  NuisanceSet out = *this;
  out.nu_ = std::move(f);
  return out;
}

double PropensityModels::pi(int a, const Vector& v, double eps) const {
  const double r = std::clamp(rho0(v), 0.0, 1.0);
  const double t = std::clamp(treatment(v), 0.0, 1.0);
  double tri[3] = {r, (1.0 - r) * (1.0 - t), (1.0 - r) * t};
  clip_to_simplex(tri, 3, eps);
  return a == 1 ? tri[2] : tri[1];
}

namespace {

Matrix stack_rows(const std::vector<Vector>& rows) {
  const Eigen::Index p = rows.empty() ? 0 : rows.front().size();
  Matrix m(static_cast<Eigen::Index>(rows.size()), p);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

ScalarFn regressor(const Matrix& raw, const Vector& y, const LearnerSpec& spec) {
  spec.check();
  if (spec.family == LearnerFamily::kernel_smoother) {
    auto k = std::make_shared<KernelSmoother>();
    k->fit(raw, y, spec.bandwidth);
    return [k](const Vector& v) {
      double out;
      k->predict(v.data(), &out);
      return out;
    };
  }
  if (spec.family != LearnerFamily::linear_least_squares) {
    throw ConfigError(std::string("learner family ") + to_string(spec.family) + " cannot fit a regression");
  }
  auto feats = std::make_shared<PolynomialFeatures>(PolynomialFeatures::detect(raw, spec.degree));
  auto model = std::make_shared<LinearLeastSquares>();
  model->fit(feats->apply_rows(raw), y, spec.regularization.value_or(0.0));
  return [feats, model](const Vector& v) {
    Vector f(static_cast<Eigen::Index>(feats->dim()));
    feats->apply(v.data(), f.data());
    return model->predict(f.data());
  };
}

ScalarFn classifier(const Matrix& raw, const Vector& label, const LearnerSpec& spec) {
  spec.check();
  if (spec.family == LearnerFamily::kernel_smoother) {
    auto k = std::make_shared<KernelSmoother>();
    k->fit(raw, label, spec.bandwidth);
    return [k](const Vector& v) {
      double out;
      k->predict(v.data(), &out);
      return out;
    };
  }
  if (spec.family != LearnerFamily::logistic) {
    throw ConfigError(std::string("learner family ") + to_string(spec.family) + " cannot fit a binary classifier");
  }
  auto feats = std::make_shared<PolynomialFeatures>(PolynomialFeatures::detect(raw, spec.degree));
  auto model = std::make_shared<LogisticRegression>();
  model->fit(feats->apply_rows(raw), label, spec.ridge());
  return [feats, model](const Vector& v) {
    Vector f(static_cast<Eigen::Index>(feats->dim()));
    feats->apply(v.data(), f.data());
    return model->predict(f.data());
  };
}

}  // namespace

ScalarFn fit_regression(const std::vector<Vector>& v, const Vector& target, const LearnerSpec& spec) {
  if (v.empty()) throw DataError("empty regression sample");
  return regressor(stack_rows(v), target, spec);
}

ScalarFn fit_classifier(const std::vector<Vector>& v, const Vector& label, const LearnerSpec& spec) {
  if (v.empty()) throw DataError("empty classification sample");
  return classifier(stack_rows(v), label, spec);
}

OutcomeModels fit_outcome(const Dataset& d1, const LearnerSpec& spec) {
  OutcomeModels out;
  for (int arm = 0; arm <= 1; ++arm) {
    std::vector<Vector> v;
    std::vector<double> y;
    for (const auto& s : d1.samples) {
      if (s.e && s.a && *s.a == arm) {
        v.push_back(s.v);
        y.push_back(*s.y);
      }
    }
    if (v.empty()) throw DataError("positivity violation in sample");
    ScalarFn f = fit_regression(v, Eigen::Map<const Vector>(y.data(), static_cast<Eigen::Index>(y.size())), spec);
    (arm == 0 ? out.mu0 : out.mu1) = std::move(f);
  }
  return out;
}

PropensityModels fit_propensities(const Dataset& d1, const LearnerSpec& spec) {
  require_both_populations(d1);
  std::vector<Vector> all, study;
  Vector target_label(static_cast<Eigen::Index>(d1.size()));
  std::vector<double> arm;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    const auto& s = d1.samples[i];
    all.push_back(s.v);
    target_label[static_cast<Eigen::Index>(i)] = s.e ? 0.0 : 1.0;
    if (s.e) {
      study.push_back(s.v);
      arm.push_back(static_cast<double>(*s.a));
    }
  }
  const double treated = std::count(arm.begin(), arm.end(), 1.0);
  if (treated == 0 || treated == static_cast<double>(arm.size())) throw DataError("positivity violation in sample");
  PropensityModels out;
  out.rho0 = fit_classifier(all, target_label, spec);
  out.treatment = fit_classifier(study, Eigen::Map<const Vector>(arm.data(), static_cast<Eigen::Index>(arm.size())), spec);
  return out;
}

LevelFn fit_w_model(const Dataset& d1, const LearnerSpec& spec) {
  spec.check();
  const std::size_t k = d1.w_support.size();
  std::vector<Vector> v;
  std::vector<std::size_t> level;
  for (const auto& s : d1.samples) {
    if (!s.e) {
      v.push_back(s.v);
      level.push_back(*s.w);
    }
  }
  if (v.empty()) throw DataError("no target samples for the W model");
  if (k == 0) throw DataError("empty W support");
  const Matrix raw = stack_rows(v);
  Matrix onehot = Matrix::Zero(raw.rows(), static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < level.size(); ++i) onehot(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(level[i])) = 1.0;
  if (k == 1) return [](const Vector&) { return Vector::Ones(1); };
  if (spec.family == LearnerFamily::kernel_smoother) {
    auto ks = std::make_shared<KernelSmoother>();
    ks->fit(raw, onehot, spec.bandwidth);
    return [ks, k](const Vector& x) {
      Vector out(static_cast<Eigen::Index>(k));
      ks->predict(x.data(), out.data());
      return out;
    };
  }
  if (spec.family != LearnerFamily::multinomial_logistic) {
    throw ConfigError(std::string("learner family ") + to_string(spec.family) + " cannot fit the W model");
  }
  auto feats = std::make_shared<PolynomialFeatures>(PolynomialFeatures::detect(raw, spec.degree));
  auto model = std::make_shared<MultinomialLogistic>();
  model->fit(feats->apply_rows(raw), onehot, spec.ridge());
  return [feats, model, k](const Vector& x) {
    Vector f(static_cast<Eigen::Index>(feats->dim()));
    feats->apply(x.data(), f.data());
    Vector out(static_cast<Eigen::Index>(k));
    model->predict(f.data(), out.data());
    return out;
  };
}

NuisanceSet fit_nuisances(const Dataset& d1, const NuisanceLearners& learners, double eps) {
  OutcomeModels mu = fit_outcome(d1, learners.outcome);
  PropensityModels pr = fit_propensities(d1, learners.propensity);
  LevelFn nu = fit_w_model(d1, learners.w_model);
  return NuisanceSet(std::move(mu.mu0), std::move(mu.mu1), std::move(pr.rho0), std::move(pr.treatment), std::move(nu),
                     d1.bounds, d1.w_support.size(), eps);
}

}  // namespace ecobounds
