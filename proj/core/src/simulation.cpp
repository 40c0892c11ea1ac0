#include "ecobounds/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "ecobounds/bounds.hpp"
#include "ecobounds/error.hpp"
#include "ecobounds/learners.hpp"
#include "ecobounds/parallel.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds {

namespace {

constexpr std::uint64_t kCoefficientStream = 0xC0EF;
constexpr std::uint64_t kUnitStream = 0x5A3;
constexpr std::uint64_t kReferenceStream = 0xBD5;

void check_range(const UniformRange& r, const char* name) {
  if (!(r.lo <= r.hi)) throw ConfigError(std::string("invalid coefficient range: ") + name);
}

Vector uniform_vector(Rng& rng, std::size_t n, const UniformRange& r) {
  Vector out(static_cast<Eigen::Index>(n));
  for (auto& x : out) x = rng.uniform(r.lo, r.hi);
  return out;
}

std::vector<WLevel> binary_levels(std::size_t k) {
  std::vector<WLevel> out;
  const std::size_t count = std::size_t{1} << k;
  for (std::size_t m = 0; m < count; ++m) {
    WLevel level(k);
    for (std::size_t j = 0; j < k; ++j) level[j] = static_cast<double>((m >> (k - 1 - j)) & 1u);
    out.push_back(level);
  }
  return out;
}

Vector level_vector(const WLevel& w) {
  return Eigen::Map<const Vector>(w.data(), static_cast<Eigen::Index>(w.size()));
}

ColumnMeta dgp_columns(const DgpConfig& c) {
  ColumnMeta m;
  for (std::size_t j = 0; j < c.dim_v(); ++j) {
    m.v_names.push_back("v" + std::to_string(j + 1));
    m.v_discrete.push_back(j >= c.n_continuous);
  }
  for (std::size_t j = 0; j < c.n_w; ++j) m.w_names.push_back("w" + std::to_string(j + 1));
  return m;
}

// Small dataset with the support, columns and representative v values; enough
// to build a Design.
Dataset design_template(const DgpModel& model, const OutcomeBounds& bounds, std::uint64_t seed) {
  Dataset d;
  d.bounds = bounds;
  d.w_support = model.support();
  d.columns = dgp_columns(model.config());
  Rng rng(seed);
  for (int i = 0; i < 64; ++i) {
    ObservedSample s;
    s.v = model.draw_v(rng);
    s.w = 0;
    d.samples.push_back(std::move(s));
  }
  return d;
}

}  // namespace

void DgpConfig::check() const {
  if (n < 1) throw ConfigError("n must be at least 1");
  if (dim_v() == 0) throw ConfigError("the DGP needs at least one V covariate");
  if (n_w == 0 || n_w > 16) throw ConfigError("n_w must lie in [1, 16]");
  if (!(continuous_sd >= 0.0) || !(noise_sd >= 0.0)) throw ConfigError("standard deviations must be non-negative");
  if (!(discrete_p >= 0.0 && discrete_p <= 1.0)) throw ConfigError("discrete_p must lie in [0, 1]");
  check_range(w_coef, "w");
  check_range(e_coef, "e");
  check_range(a_coef, "a");
  check_range(effect_coef, "effect");
  check_range(outcome_coef, "outcome");
  if (outcome_bounds && !(outcome_bounds->a < outcome_bounds->b)) throw ConfigError("outcome bounds need a < b");
  if (!(bound_slack >= 0.0)) throw ConfigError("bound_slack must be non-negative");
}

DgpCoefficients draw_coefficients(const DgpConfig& c) {
  Rng rng(c.coefficient_seed ? *c.coefficient_seed : derive_seed(c.seed, kCoefficientStream));
  const std::size_t p = c.dim_v();
  DgpCoefficients k;
  k.w_logit.resize(static_cast<Eigen::Index>(c.n_w), static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < k.w_logit.rows(); ++j) {
    for (Eigen::Index i = 0; i < k.w_logit.cols(); ++i) k.w_logit(j, i) = rng.uniform(c.w_coef.lo, c.w_coef.hi);
  }
  k.e_logit = uniform_vector(rng, p, c.e_coef);
  k.a_logit = uniform_vector(rng, p, c.a_coef);
  k.effect_v = uniform_vector(rng, p, c.effect_coef);
  k.effect_w = uniform_vector(rng, c.n_w, c.effect_coef);
  k.outcome_w = uniform_vector(rng, c.n_w, c.outcome_coef);
  k.outcome_v = uniform_vector(rng, p, c.outcome_coef);
  return k;
}

DgpModel::DgpModel(DgpConfig config, DgpCoefficients coefficients)
    : config_(std::move(config)), coef_(std::move(coefficients)), support_(binary_levels(config_.n_w)) {}

Vector DgpModel::draw_v(Rng& rng) const {
  Vector v(static_cast<Eigen::Index>(config_.dim_v()));
  for (std::size_t j = 0; j < config_.n_continuous; ++j) {
    v[static_cast<Eigen::Index>(j)] = rng.normal(config_.continuous_mean, config_.continuous_sd);
  }
  for (std::size_t j = 0; j < config_.n_discrete; ++j) {
    v[static_cast<Eigen::Index>(config_.n_continuous + j)] = rng.bernoulli(config_.discrete_p) ? 1.0 : 0.0;
  }
  return v;
}

Vector DgpModel::w_probabilities(const Vector& v) const {
  Vector p = config_.w_dependence_scale * (coef_.w_logit * v);
  for (auto& x : p) x = sigmoid(x);
  return p;
}

Vector DgpModel::nu(const Vector& v) const {
  const Vector p = w_probabilities(v);
  Vector out(static_cast<Eigen::Index>(support_.size()));
  for (std::size_t l = 0; l < support_.size(); ++l) {
    const WLevel& w = support_.level(l);
    double prob = 1.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double pj = p[static_cast<Eigen::Index>(j)];
      prob *= w[j] == 1.0 ? pj : 1.0 - pj;
    }
    out[static_cast<Eigen::Index>(l)] = prob;
  }
  return out;
}

double DgpModel::rho0(const Vector& v) const { return 1.0 - sigmoid(v.dot(coef_.e_logit)); }

double DgpModel::treatment(const Vector& v) const { return sigmoid(v.dot(coef_.a_logit)); }

double DgpModel::mu(int a, const Vector& v) const {
  const Vector p = w_probabilities(v);
  return a * restricted_cate(v) + p.dot(coef_.outcome_w) + v.dot(coef_.outcome_v);
}

double DgpModel::cate(const Vector& v, const WLevel& w) const {
  return v.dot(coef_.effect_v) + config_.w_effect_scale * level_vector(w).dot(coef_.effect_w);
}

double DgpModel::restricted_cate(const Vector& v) const {
  return v.dot(coef_.effect_v) + config_.w_effect_scale * w_probabilities(v).dot(coef_.effect_w);
}

NuisanceSet DgpModel::nuisances(const OutcomeBounds& bounds, double eps) const {
  const DgpModel self = *this;
  return NuisanceSet([self](const Vector& v) { return self.mu(0, v); },
                     [self](const Vector& v) { return self.mu(1, v); },
                     [self](const Vector& v) { return self.rho0(v); },
                     [self](const Vector& v) { return self.treatment(v); },
                     [self](const Vector& v) { return self.nu(v); }, bounds, support_.size(), eps);
}

std::pair<Dataset, GroundTruth> generate(const DgpConfig& config) {
  config.check();
  DgpModel model(config, draw_coefficients(config));
  const std::size_t n = config.n;
  Rng rng(derive_seed(config.seed, kUnitStream));

  std::vector<Vector> vs(n);
  std::vector<bool> es(n);
  GroundTruth t{{}, {}, {}, {}, {}, {}, 0.0, 0.0, 0, model, {}};
  t.cate.resize(n);
  t.restricted.resize(n);
  t.y1.resize(n);
  t.y0.resize(n);
  t.w_index.resize(n);
  t.a.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    vs[i] = model.draw_v(rng);
    const Vector pw = model.w_probabilities(vs[i]);
    WLevel w(config.n_w);
    for (std::size_t j = 0; j < config.n_w; ++j) w[j] = rng.bernoulli(pw[static_cast<Eigen::Index>(j)]) ? 1.0 : 0.0;
    es[i] = rng.bernoulli(1.0 - model.rho0(vs[i]));
    t.a[i] = rng.bernoulli(model.treatment(vs[i])) ? 1 : 0;
    const double noise = rng.normal(0.0, config.noise_sd);
    t.w_index[i] = *model.support().find(w);
    t.cate[i] = model.cate(vs[i], w);
    t.restricted[i] = model.restricted_cate(vs[i]);
    const double base = level_vector(w).dot(model.coefficients().outcome_w) + vs[i].dot(model.coefficients().outcome_v) + noise;
    t.y0[i] = base;
    t.y1[i] = base + t.cate[i];
  }

  OutcomeBounds bounds;
  if (config.outcome_bounds) {
    bounds = *config.outcome_bounds;
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min({lo, t.y0[i], t.y1[i]});
      hi = std::max({hi, t.y0[i], t.y1[i]});
    }
    const double pad = config.bound_slack * std::max(hi - lo, 1e-12);
    bounds = {lo - pad, hi + pad};
  }

  Dataset d;
  d.bounds = bounds;
  d.w_support = model.support();
  d.columns = dgp_columns(config);
  d.samples.resize(n);
  double gap_sum = 0.0;
  std::size_t target = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ObservedSample& s = d.samples[i];
    s.v = vs[i];
    s.e = es[i];
    if (s.e) {
      s.a = t.a[i];
      double y = t.a[i] == 1 ? t.y1[i] : t.y0[i];
      if (y < bounds.a || y > bounds.b) {
        y = std::clamp(y, bounds.a, bounds.b);
        ++t.clamped;
      }
      s.y = y;
    } else {
      s.w = t.w_index[i];
      const double gap = std::abs(t.cate[i] - t.restricted[i]);
      t.true_delta_max = std::max(t.true_delta_max, gap);
      gap_sum += gap;
      ++target;
    }
  }
  t.true_delta_mean = target ? gap_sum / static_cast<double>(target) : 0.0;
  t.oracle = model.nuisances(bounds);
  return {std::move(d), std::move(t)};
}

OutcomeBounds reference_bounds(const DgpConfig& config, std::size_t draws, double slack) {
  config.check();
  const DgpModel model(config, draw_coefficients(config));
  Rng rng(derive_seed(config.seed, kReferenceStream));
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < draws; ++i) {
    const Vector v = model.draw_v(rng);
    const Vector pw = model.w_probabilities(v);
    WLevel w(config.n_w);
    for (std::size_t j = 0; j < config.n_w; ++j) w[j] = rng.bernoulli(pw[static_cast<Eigen::Index>(j)]) ? 1.0 : 0.0;
    const double y0 = level_vector(w).dot(model.coefficients().outcome_w) + v.dot(model.coefficients().outcome_v) +
                      rng.normal(0.0, config.noise_sd);
    const double y1 = y0 + model.cate(v, w);
    lo = std::min({lo, y0, y1});
    hi = std::max({hi, y0, y1});
  }
  const double pad = slack * (hi - lo);
  return {lo - pad, hi + pad};
}

double true_gamma(const DgpModel& model, const OutcomeBounds& bounds, const ModelSpec& spec, const Vector& v,
                  std::size_t w) {
  const double dmu = model.mu(1, v) - model.mu(0, v);
  const double nu = model.nu(v)[static_cast<Eigen::Index>(w)];
  const BoundPair p = spec.delta ? sensitivity_bounds(dmu, nu, bounds, {*spec.delta}, 0.0)
                                 : theorem1_bounds(dmu, nu, bounds, 0.0);
  return spec.side == Side::lower ? p.gamma_lower : p.gamma_upper;
}

Vector oracle_beta(const DgpModel& model, const OutcomeBounds& bounds, const ModelSpec& spec, std::size_t n_oracle,
                   std::uint64_t seed) {
  if (spec.nonlinear) throw ConfigError("oracle projection supports linear models only");
  const Dataset templ = design_template(model, bounds, derive_seed(seed, 0));
  const Design design(templ, spec);
  const auto p = static_cast<Eigen::Index>(design.dim());
  const std::size_t k = model.support().size();
  struct Acc {
    Matrix s;
    Vector c;
    Acc operator+(const Acc& o) const { return {s + o.s, c + o.c}; }
  };
  const Acc zero{Matrix::Zero(p, p), Vector::Zero(p)};
  const Acc total = chunked_sum(n_oracle, zero, [&](std::size_t begin, std::size_t end) {
    Acc acc = zero;
    Rng rng(derive_seed(seed, 1, begin));
    Vector x;
    Vector basis;
    for (std::size_t i = begin; i < end; ++i) {
      const Vector v = model.draw_v(rng);
      const double pop = spec.population == ProjectionPopulation::target ? model.rho0(v) : 1.0;
      const Vector nu = model.nu(v);
      const double dmu = model.mu(1, v) - model.mu(0, v);
      for (std::size_t w = 0; w < k; ++w) {
        const double nw = nu[static_cast<Eigen::Index>(w)];
        if (!(nw > 0.0)) continue;
        const BoundPair bp = spec.delta ? sensitivity_bounds(dmu, nw, bounds, {*spec.delta}, 0.0)
                                        : theorem1_bounds(dmu, nw, bounds, 0.0);
        const double gamma = spec.side == Side::lower ? bp.gamma_lower : bp.gamma_upper;
        design.x(v, w, x);
        design.basis(x, basis);
        const double weight = pop * nw * design.weight(x);
        acc.s.selfadjointView<Eigen::Lower>().rankUpdate(basis, weight);
        acc.c += (weight * gamma) * basis;
      }
    }
    return acc;
  });
  Matrix s = total.s.selfadjointView<Eigen::Lower>();
  return solve_square(s, total.c).x.col(0);
}

Vector oracle_beta(const DgpConfig& config, const ModelSpec& spec, std::size_t n_oracle) {
  if (n_oracle < 100000) throw ConfigError("n_oracle must be at least 1e5");
  auto [d, truth] = generate(config);
  return oracle_beta(truth.model, d.bounds, spec, n_oracle, derive_seed(config.seed, 0x0AC1E));
}

}  // namespace ecobounds
