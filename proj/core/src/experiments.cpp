#include "ecobounds/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "ecobounds/baseline_dr.hpp"
#include "ecobounds/bounds.hpp"
#include "ecobounds/error.hpp"
#include "ecobounds/inference.hpp"
#include "ecobounds/parallel.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds {

namespace {

constexpr std::uint64_t kOracleStream = 0x0AC1E;
constexpr std::uint64_t kPerturbStream = 0x9E27;
constexpr std::uint64_t kFoldStream = 0xF01D;
constexpr std::uint64_t kBaselineStream = 0xD2B;
constexpr std::uint64_t kBootStream = 0xB007;

double mad(const Vector& a, const Vector& b) { return (a - b).cwiseAbs().mean(); }

Json seeds_json(const std::vector<std::uint64_t>& seeds) {
  Json j = Json::array();
  for (auto s : seeds) j.push_back(s);
  return j;
}

Json base_metadata(const std::string& name, const DgpConfig& config, const std::vector<std::uint64_t>& seeds) {
  Json m;
  m["experiment"] = name;
  m["tool_version"] = kToolVersion;
  m["dgp"] = to_json(config);
  m["seeds"] = seeds_json(seeds);
  return m;
}

// Runs body(seed_index) for each seed and concatenates rows in seed order.
template <class Body>
void per_seed(ExperimentResult& out, const std::vector<std::uint64_t>& seeds, Body body) {
  std::vector<std::vector<ResultRow>> rows(seeds.size());
  std::vector<Json> coefs(seeds.size());
  parallel_for(seeds.size(), [&](std::size_t s) { body(s, rows[s], coefs[s]); });
  Json c = Json::object();
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    out.rows.insert(out.rows.end(), rows[s].begin(), rows[s].end());
    c[std::to_string(seeds[s])] = coefs[s];
  }
  out.metadata["coefficients"] = c;
}

DgpConfig with_seed(const DgpConfig& config, std::uint64_t seed) {
  DgpConfig c = config;
  c.seed = seed;
  return c;
}

std::vector<Vector> all_v(const Dataset& d) {
  std::vector<Vector> out;
  out.reserve(d.size());
  for (const auto& s : d.samples) out.push_back(s.v);
  return out;
}

Json components_json(const std::vector<NuisanceComponent>& cs) {
  Json j = Json::array();
  for (auto c : cs) j.push_back(to_string(c));
  return j;
}

}  // namespace

std::vector<double> ExperimentResult::values(const std::string& cell, const std::string& estimator,
                                             const std::string& metric) const {
  std::vector<double> out;
  for (const auto& r : rows) {
    if (r.cell == cell && r.estimator == estimator && r.metric == metric) out.push_back(r.value);
  }
  return out;
}

void write_results_csv(const ExperimentResult& r, std::ostream& out) {
  out << "experiment,seed,cell,estimator,metric,value\n";
  for (const auto& row : r.rows) {
    out << row.experiment << ',' << row.seed << ',' << row.cell << ',' << row.estimator << ',' << row.metric << ','
        << format_double(row.value) << '\n';
  }
}

std::string cell_label(const std::string& key, double value) { return key + "=" + format_double(value); }

ExperimentResult run_error_grid(const DgpConfig& config, const ErrorGridOptions& o) {
  ExperimentResult out;
  out.experiment = "error_grid";
  out.metadata = base_metadata(out.experiment, config, o.seeds);
  out.metadata["shape"] = o.shape == NoiseShape::smooth ? "smooth" : "constant-shift";
  out.metadata["outcome_targets"] = components_json(o.outcome_targets);
  out.metadata["propensity_targets"] = components_json(o.propensity_targets);
  out.metadata["model"] = to_json(o.model);
  out.metadata["relative_delta"] = o.relative_delta ? Json(*o.relative_delta) : Json(nullptr);
  out.metadata["n_oracle"] = o.n_oracle;
  out.metadata["eps"] = o.eps;

  per_seed(out, o.seeds, [&](std::size_t s, std::vector<ResultRow>& rows, Json& coef) {
    const std::uint64_t seed = o.seeds[s];
    auto [d, truth] = generate(with_seed(config, seed));
    coef = to_json(truth.model.coefficients());
    ModelSpec model = o.model;
    if (o.relative_delta) model.delta = *o.relative_delta * truth.true_delta_max;
    const Vector oracle = oracle_beta(truth.model, d.bounds, model, o.n_oracle, derive_seed(seed, kOracleStream));
    const NuisanceSet eta0 = truth.model.nuisances(d.bounds, o.eps);
    const std::vector<Vector> reference = all_v(d);
    for (std::size_t i = 0; i < o.outcome_levels.size(); ++i) {
      const double eo = o.outcome_levels[i];
      const PerturbationSpec po{o.outcome_targets, eo, o.shape, derive_seed(seed, kPerturbStream, i), 1.0};
      const NuisanceSet eta_o = perturb(eta0, po, reference).eta;
      for (std::size_t j = 0; j < o.propensity_levels.size(); ++j) {
        const double ep = o.propensity_levels[j];
        const std::string cell = cell_label("eo", eo) + ";" + cell_label("ep", ep);
        const PerturbationSpec pp{o.propensity_targets, ep, o.shape, derive_seed(seed, kPerturbStream + 1, j), 1.0};
        const NuisanceSet eta = perturb(eta_o, pp, reference).eta;
        const BetaEstimate plug = plugin_beta(d, eta, model);
        const BetaEstimate bc = solve_bias_corrected(d, eta, model);
        rows.push_back({out.experiment, seed, cell, "plugin", "mad", mad(plug.beta, oracle)});
        rows.push_back({out.experiment, seed, cell, "bias_corrected", "mad", mad(bc.beta, oracle)});
      }
    }
  });
  return out;
}

double entropy(const Vector& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

ExperimentResult run_entropy_sweep(const DgpConfig& config, const EntropySweepOptions& o) {
  ExperimentResult out;
  out.experiment = "entropy";
  out.metadata = base_metadata(out.experiment, config, o.seeds);
  out.metadata["scales"] = o.scales;
  out.metadata["mode"] = o.mode == NuisanceMode::oracle ? "oracle" : "fitted";
  out.metadata["delta"] = o.delta ? Json(*o.delta) : Json(nullptr);
  if (o.mode == NuisanceMode::fitted) out.metadata["learner"] = to_json(o.learners);

  per_seed(out, o.seeds, [&](std::size_t s, std::vector<ResultRow>& rows, Json& coef) {
    const std::uint64_t seed = o.seeds[s];
    Json per_scale = Json::array();
    for (double scale : o.scales) {
      DgpConfig c = with_seed(config, seed);
      c.w_dependence_scale = scale;
      auto [d, truth] = generate(c);
      per_scale.push_back(to_json(truth.model.coefficients()));
      const std::string cell = cell_label("scale", scale);
      double h_sum = 0.0;
      std::size_t n_target = 0;
      for (const auto& smp : d.samples) {
        if (smp.e) continue;
        h_sum += entropy(truth.model.nu(smp.v));
        ++n_target;
      }
      double width = 0.0;
      if (o.mode == NuisanceMode::oracle) {
        std::optional<SensitivityLevel> level;
        if (o.delta) level = SensitivityLevel{*o.delta};
        const auto bounds = pointwise_bounds(d, truth.oracle, level);
        for (const auto& r : bounds) {
          if (!r.error) width += r.nu * r.bounds.width();
        }
      } else {
        ModelSpec lower;
        lower.delta = o.delta;
        ModelSpec upper = lower;
        upper.side = Side::upper;
        const auto folds = fit_folds(d, o.learners, derive_seed(seed, kFoldStream));
        const BetaEstimate bl = estimate_on_folds(folds, lower, EstimatorKind::bias_corrected, false);
        const BetaEstimate bu = estimate_on_folds(folds, upper, EstimatorKind::bias_corrected, false);
        const Design design(d, lower);
        Vector x;
        for (const auto& smp : d.samples) {
          if (smp.e) continue;
          design.x(smp.v, *smp.w, x);
          width += design.model(x, bu.beta) - design.model(x, bl.beta);
        }
      }
      const double nt = static_cast<double>(std::max<std::size_t>(n_target, 1));
      rows.push_back({out.experiment, seed, cell, (o.mode == NuisanceMode::oracle ? "oracle" : "fitted"), "entropy", h_sum / nt});
      rows.push_back({out.experiment, seed, cell, (o.mode == NuisanceMode::oracle ? "oracle" : "fitted"), "width", width / nt});
    }
    coef = per_scale;
  });
  return out;
}

ExperimentResult run_delta_sweep(const DgpConfig& config, const DeltaSweepOptions& o) {
  ExperimentResult out;
  out.experiment = "delta_sweep";
  out.metadata = base_metadata(out.experiment, config, o.seeds);
  out.metadata["deltas"] = o.deltas;
  out.metadata["relative"] = o.relative;
  out.metadata["learner"] = to_json(o.learners);
  out.metadata["degree"] = o.degree;
  out.metadata["inference"] = to_string(o.inference);
  if (o.inference == CovarianceMethod::bootstrap) out.metadata["replicates"] = o.replicates;

  per_seed(out, o.seeds, [&](std::size_t s, std::vector<ResultRow>& rows, Json& coef) {
    const std::uint64_t seed = o.seeds[s];
    auto [d, truth] = generate(with_seed(config, seed));
    coef = to_json(truth.model.coefficients());
    std::vector<std::size_t> target;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!d.samples[i].e) target.push_back(i);
    }
    const double nt = static_cast<double>(target.size());
    const auto folds = fit_folds(d, o.learners, derive_seed(seed, kFoldStream));
    const RestrictedCateFit baseline = fit_dr_restricted(d, o.learners, derive_seed(seed, kBaselineStream));
    double base_cover = 0.0;
    for (std::size_t i : target) {
      const Interval& ci = baseline.ci[i];
      if (ci.lower <= truth.cate[i] && truth.cate[i] <= ci.upper) base_cover += 1.0;
    }
    base_cover /= nt;

    std::vector<double> abs_deltas;
    for (double g : o.deltas) {
      const double delta = o.relative ? g * truth.true_delta_max : g;
      if (delta > d.bounds.range()) throw ConfigError("sensitivity level must lie in [0, b-a]");
      abs_deltas.push_back(delta);
    }

    std::vector<ModelSpec> mean_specs;
    for (double delta : abs_deltas) {
      for (Side side : {Side::lower, Side::upper}) {
        ModelSpec m;
        m.side = side;
        m.delta = delta;
        m.degree = 0;
        mean_specs.push_back(m);
      }
    }
    std::vector<CovarianceEstimate> boot;
    if (o.inference == CovarianceMethod::bootstrap) {
      boot = bootstrap_many(d, mean_specs, o.learners, o.replicates, derive_seed(seed, kBootStream));
    }

    for (std::size_t k = 0; k < abs_deltas.size(); ++k) {
      const double delta = abs_deltas[k];
      const std::string cell = cell_label(o.relative ? "delta_rel" : "delta", o.deltas[k]);
      ModelSpec lower;
      lower.delta = delta;
      lower.degree = o.degree;
      ModelSpec upper = lower;
      upper.side = Side::upper;
      const BetaEstimate bl = estimate_on_folds(folds, lower, EstimatorKind::bias_corrected, false);
      const BetaEstimate bu = estimate_on_folds(folds, upper, EstimatorKind::bias_corrected, false);
      const Design design(d, lower);
      double cover = 0.0;
      double width = 0.0;
      double naive_cover = 0.0;
      Vector x;
      for (std::size_t i : target) {
        design.x(d.samples[i].v, *d.samples[i].w, x);
        const double gl = design.model(x, bl.beta);
        const double gu = design.model(x, bu.beta);
        width += gu - gl;
        if (gl <= truth.cate[i] && truth.cate[i] <= gu) cover += 1.0;
        const double r = baseline.estimate[static_cast<Eigen::Index>(i)];
        if (r - delta <= truth.cate[i] && truth.cate[i] <= r + delta) naive_cover += 1.0;
      }

      const std::string eco = "ecological";
      rows.push_back({out.experiment, seed, cell, eco, "delta", delta});
      for (int side = 0; side < 2; ++side) {
        const ModelSpec& ms = mean_specs[2 * k + static_cast<std::size_t>(side)];
        const BetaEstimate mean = estimate_on_folds(folds, ms, EstimatorKind::bias_corrected,
                                                    o.inference == CovarianceMethod::sandwich);
        const Interval ci = o.inference == CovarianceMethod::sandwich ? mean.covariance->intervals[0]
                                                                      : boot[2 * k + static_cast<std::size_t>(side)].intervals[0];
        const std::string name = side == 0 ? "mean_lower" : "mean_upper";
        rows.push_back({out.experiment, seed, cell, eco, name, mean.beta[0]});
        rows.push_back({out.experiment, seed, cell, eco, name + "_ci_lower", ci.lower});
        rows.push_back({out.experiment, seed, cell, eco, name + "_ci_upper", ci.upper});
      }
      rows.push_back({out.experiment, seed, cell, eco, "width", width / nt});
      rows.push_back({out.experiment, seed, cell, eco, "coverage", cover / nt});
      rows.push_back({out.experiment, seed, cell, "naive", "width", 2.0 * delta});
      rows.push_back({out.experiment, seed, cell, "naive", "coverage", naive_cover / nt});
      rows.push_back({out.experiment, seed, cell, "dr_baseline", "coverage", base_cover});
    }
    rows.push_back({out.experiment, seed, "truth", "oracle", "true_delta_max", truth.true_delta_max});
    rows.push_back({out.experiment, seed, "truth", "oracle", "true_delta_mean", truth.true_delta_mean});
  });
  return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ConfigError("spearman needs two equal-length samples");
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x);
  const auto ry = ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace ecobounds
