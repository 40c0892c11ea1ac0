#include "commands.hpp"

#include <fstream>
#include <sstream>

#include "ecobounds/baseline_dr.hpp"
#include "ecobounds/benchmarking.hpp"
#include "ecobounds/bounds.hpp"
#include "ecobounds/error.hpp"
#include "ecobounds/experiments.hpp"
#include "ecobounds/inference.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds::cli {

namespace fs = std::filesystem;

std::uint64_t Context::seed() const { return seed_flag ? *seed_flag : get_seed(config, "seed", 0); }

std::vector<std::uint64_t> Context::seeds() const {
  if (config.contains("seeds") && !seed_flag) {
    std::vector<std::uint64_t> out;
    const Json& s = config.at("seeds");
    if (!s.is_array()) throw ConfigError("seeds must be an array");
    for (const auto& x : s) {
      if (!x.is_number_unsigned()) throw ConfigError("seeds must be non-negative integers");
      out.push_back(x.get<std::uint64_t>());
    }
    return out;
  }
  const long long n = get_int(config, "n_seeds", 1);
  if (n < 1) throw ConfigError("n_seeds must be at least 1");
  std::vector<std::uint64_t> out;
  for (long long i = 0; i < n; ++i) out.push_back(seed() + static_cast<std::uint64_t>(i));
  return out;
}

fs::path Context::resolve(const std::string& path) const {
  const fs::path p(path);
  return p.is_absolute() ? p : config_dir / p;
}

void Context::write(const std::string& name, const std::string& text) {
  std::ofstream out(out_dir / name, std::ios::binary);
  out << text;
  if (!out) throw DataError("cannot write output file: " + (out_dir / name).string());
  files.push_back(name);
}

void Context::write_json(const std::string& name, Json j) {
  j["fingerprint"] = fingerprint;
  write(name, j.dump(2) + "\n");
}

namespace {

IngestResult load_input(const Context& ctx) {
  if (!require_key(ctx.config, "input").is_string()) throw ConfigError("input must be a path");
  return ingest_csv_file(ctx.resolve(ctx.config.at("input").get<std::string>()).string(),
                         ingest_from_json(require_key(ctx.config, "columns")));
}

template <class F>
std::string to_text(F f) {
  std::ostringstream s;
  f(s);
  return s.str();
}

NuisanceLearners learners_of(const Json& config) {
  return config.contains("learner") ? learners_from_json(config.at("learner")) : NuisanceLearners{};
}

BenchmarkStatistic statistic_of(const Json& j) {
  return BenchmarkStatistic::parse(get_string(j, "statistic", "mean-abs"));
}

DeltaBenchmark run_benchmark(const Dataset& d, const Json& j, const NuisanceLearners& fallback, std::uint64_t seed) {
  const long long k = get_int(j, "holdout_size", 1);
  if (k < 1) throw ConfigError("holdout_size must be at least 1");
  const LearnerSpec outcome = j.contains("learner") ? learners_from_json(j.at("learner")).outcome : fallback.outcome;
  return benchmark_delta(d, static_cast<std::size_t>(k), outcome, statistic_of(j), seed);
}

Json ingest_summary(const IngestResult& r) {
  return {{"rows_read", r.rows_read},
          {"rows_dropped", r.rows_dropped},
          {"n", r.dataset.size()},
          {"n_study", r.dataset.count_study()},
          {"n_target", r.dataset.count_target()},
          {"bounds", to_json(r.dataset.bounds)},
          {"w_levels", r.dataset.w_support.levels()}};
}

DgpConfig dgp_of(const Context& ctx) {
  DgpConfig c = ctx.config.contains("dgp") ? dgp_from_json(ctx.config.at("dgp")) : DgpConfig{};
  if (ctx.seed_flag || ctx.config.contains("seed")) c.seed = ctx.seed();
  return c;
}

std::vector<double> doubles(const Json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key must be a numeric array: ") + key);
  }
}

NoiseShape shape_of(const std::string& s) {
  if (s == "smooth") return NoiseShape::smooth;
  if (s == "constant-shift" || s == "constant") return NoiseShape::constant_shift;
  throw ConfigError("unknown noise shape: " + s);
}

CovarianceMethod method_of(const std::string& s) {
  if (s == "sandwich") return CovarianceMethod::sandwich;
  if (s == "bootstrap") return CovarianceMethod::bootstrap;
  throw ConfigError("unknown inference method: " + s);
}

}  // namespace

void cmd_ingest(Context& ctx) {
  const IngestResult r = load_input(ctx);
  ctx.write("dataset.csv", to_text([&](std::ostream& s) { write_dataset_csv(r.dataset, s); }));
  ctx.write_json("columns.json", to_json(roundtrip_config(r.dataset)));
  ctx.summary = ingest_summary(r);
  ctx.write_json("ingest.json", ctx.summary);
}

void cmd_simulate(Context& ctx) {
  const DgpConfig c = dgp_of(ctx);
  auto [d, truth] = generate(c);
  ctx.write("dataset.csv", to_text([&](std::ostream& s) { write_dataset_csv(d, s); }));
  ctx.write("truth.csv", to_text([&](std::ostream& s) {
              s << "unit_id,population,w_level,treatment,cate,restricted_cate,y0,y1\n";
              for (std::size_t i = 0; i < d.size(); ++i) {
                s << i << ',' << (d.samples[i].e ? 1 : 0) << ',' << truth.w_index[i] << ',' << truth.a[i] << ','
                  << format_double(truth.cate[i]) << ',' << format_double(truth.restricted[i]) << ','
                  << format_double(truth.y0[i]) << ',' << format_double(truth.y1[i]) << '\n';
              }
            }));
  ctx.write_json("columns.json", to_json(roundtrip_config(d)));
  Json meta;
  meta["tool_version"] = kToolVersion;
  meta["dgp"] = to_json(c);
  meta["coefficients"] = to_json(truth.model.coefficients());
  meta["bounds"] = to_json(d.bounds);
  meta["true_delta_max"] = truth.true_delta_max;
  meta["true_delta_mean"] = truth.true_delta_mean;
  meta["clamped_outcomes"] = truth.clamped;
  ctx.write_json("simulate.json", meta);
  ctx.summary = {{"n", d.size()}, {"true_delta_max", truth.true_delta_max}};
}

void cmd_estimate(Context& ctx) {
  const IngestResult in = load_input(ctx);
  const Dataset& d = in.dataset;
  const std::uint64_t seed = ctx.seed();
  const NuisanceLearners learners = learners_of(ctx.config);
  const Json model = ctx.config.contains("model") ? ctx.config.at("model") : Json::object();
  const ModelSpec base = model_from_json(model);

  std::vector<Side> sides{Side::lower, Side::upper};
  if (model.contains("sides")) {
    sides.clear();
    for (const auto& s : model.at("sides")) sides.push_back(parse_side(s.get<std::string>()));
  } else if (model.contains("side")) {
    sides = {base.side};
  }

  std::vector<std::optional<double>> deltas{base.delta};
  Json delta_source = base.delta ? Json("config") : Json("none");
  std::optional<DeltaBenchmark> bench;
  if (ctx.config.contains("delta_benchmark")) {
    bench = run_benchmark(d, ctx.config.at("delta_benchmark"), learners, seed);
    deltas = {std::min(bench->delta_hat, d.bounds.range())};
    delta_source = "benchmark";
  } else if (model.contains("deltas")) {
    deltas.clear();
    for (double x : doubles(model, "deltas", {})) deltas.emplace_back(x);
    delta_source = "config";
  }

  const std::string estimator = get_string(ctx.config, "estimator", "bias-corrected");
  std::vector<EstimatorKind> kinds;
  if (estimator == "both") {
    kinds = {EstimatorKind::plugin, EstimatorKind::bias_corrected};
  } else if (estimator == "plugin" || estimator == "plug-in") {
    kinds = {EstimatorKind::plugin};
  } else if (estimator == "bias-corrected" || estimator == "bias_corrected") {
    kinds = {EstimatorKind::bias_corrected};
  } else {
    throw ConfigError("unknown estimator: " + estimator);
  }

  const Json inf = ctx.config.contains("inference") ? ctx.config.at("inference") : Json::object();
  const std::string method = get_string(inf, "method", "sandwich");
  const int replicates = static_cast<int>(get_int(inf, "replicates", 200));
  const bool mean_bounds = get_bool(ctx.config, "mean_bounds", true);

  std::vector<ModelSpec> specs;
  for (const auto& delta : deltas) {
    for (Side side : sides) {
      ModelSpec s = base;
      s.side = side;
      s.delta = delta;
      s.check(d.bounds);
      specs.push_back(s);
      if (mean_bounds) {
        s.degree = 0;
        specs.push_back(s);
      }
    }
  }

  const auto folds = fit_folds(d, learners, seed);
  Json estimates = Json::array();
  Json intervals = Json::array();
  for (EstimatorKind kind : kinds) {
    std::vector<CovarianceEstimate> boot;
    if (method == "bootstrap") {
      CrossfitOptions opt;
      opt.kind = kind;
      boot = bootstrap_many(d, specs, learners, replicates, derive_seed(seed, 1), opt);
    } else if (method != "sandwich" && method != "none") {
      throw ConfigError("unknown inference method: " + method);
    }
    for (std::size_t k = 0; k < specs.size(); ++k) {
      BetaEstimate b = estimate_on_folds(folds, specs[k], kind, method == "sandwich");
      b.seed = seed;
      b.learner_fingerprint = learners.fingerprint();
      if (method == "bootstrap") b.covariance = boot[k];
      Json e = to_json(b);
      e["model"] = to_json(specs[k]);
      estimates.push_back(e);
      Json iv;
      iv["side"] = to_string(specs[k].side);
      iv["delta"] = specs[k].delta ? Json(*specs[k].delta) : Json(nullptr);
      iv["estimator"] = to_string(kind);
      iv["degree"] = specs[k].degree;
      iv["method"] = method;
      if (b.covariance) {
        Json list = Json::array();
        for (std::size_t j = 0; j < b.covariance->intervals.size(); ++j) {
          list.push_back({{"estimate", b.beta[static_cast<Eigen::Index>(j)]},
                          {"ci", to_json(b.covariance->intervals[j])}});
        }
        iv["coefficients"] = list;
      }
      intervals.push_back(iv);
    }
  }

  Json beta;
  beta["seed"] = seed;
  beta["learner"] = to_json(learners);
  beta["delta_source"] = delta_source;
  if (bench) beta["benchmark"] = to_json(*bench);
  beta["dataset"] = ingest_summary(in);
  beta["estimates"] = estimates;
  ctx.write_json("beta.json", beta);

  const NuisanceSet eta = fit_nuisances(d, learners);
  for (std::size_t k = 0; k < deltas.size(); ++k) {
    std::optional<SensitivityLevel> level;
    if (deltas[k]) level = SensitivityLevel{*deltas[k]};
    const auto rows = pointwise_bounds(d, eta, level);
    const std::string name = deltas.size() == 1 ? "bounds.csv" : "bounds_" + std::to_string(k) + ".csv";
    ctx.write(name, to_text([&](std::ostream& s) { write_bounds_csv(rows, s); }));
  }
  ctx.write_json("intervals.json", {{"intervals", intervals}});

  Json summary = Json::array();
  for (const auto& iv : intervals) {
    if (iv["degree"] == 0 && iv.contains("coefficients")) {
      summary.push_back({{"side", iv["side"]},
                         {"delta", iv["delta"]},
                         {"estimator", iv["estimator"]},
                         {"mean", iv["coefficients"][0]}});
    }
  }
  ctx.summary = {{"n", d.size()}, {"mean_bounds", summary}};
}

void cmd_error_grid(Context& ctx) {
  const DgpConfig c = dgp_of(ctx);
  ErrorGridOptions o;
  const Json& j = ctx.config;
  o.outcome_levels = doubles(j, "outcome_levels", o.outcome_levels);
  o.propensity_levels = doubles(j, "propensity_levels", o.propensity_levels);
  o.seeds = ctx.seeds();
  o.shape = shape_of(get_string(j, "shape", "smooth"));
  if (j.contains("model")) o.model = model_from_json(j.at("model"));
  if (j.contains("relative_delta") && !j.at("relative_delta").is_null()) {
    o.relative_delta = get_double(j, "relative_delta", 1.0);
  }
  o.n_oracle = static_cast<std::size_t>(get_int(j, "n_oracle", static_cast<long long>(o.n_oracle)));
  o.eps = get_double(j, "eps", o.eps);
  const ExperimentResult r = run_error_grid(c, o);
  ctx.write("results.csv", to_text([&](std::ostream& s) { write_results_csv(r, s); }));
  ctx.write_json("metadata.json", r.metadata);
  ctx.summary = {{"rows", r.rows.size()}};
}

void cmd_entropy(Context& ctx) {
  const DgpConfig c = dgp_of(ctx);
  EntropySweepOptions o;
  const Json& j = ctx.config;
  o.scales = doubles(j, "scales", o.scales);
  o.seeds = ctx.seeds();
  const std::string mode = get_string(j, "mode", "oracle");
  if (mode == "oracle") {
    o.mode = NuisanceMode::oracle;
  } else if (mode == "fitted") {
    o.mode = NuisanceMode::fitted;
  } else {
    throw ConfigError("unknown nuisance mode: " + mode);
  }
  if (j.contains("delta") && !j.at("delta").is_null()) o.delta = get_double(j, "delta", 0.0);
  o.learners = learners_of(j);
  const ExperimentResult r = run_entropy_sweep(c, o);
  ctx.write("results.csv", to_text([&](std::ostream& s) { write_results_csv(r, s); }));
  ctx.write_json("metadata.json", r.metadata);
  ctx.summary = {{"rows", r.rows.size()}};
}

void cmd_delta_sweep(Context& ctx) {
  const DgpConfig c = dgp_of(ctx);
  DeltaSweepOptions o;
  const Json& j = ctx.config;
  o.deltas = doubles(j, "deltas", o.deltas);
  o.relative = get_bool(j, "relative", o.relative);
  o.seeds = ctx.seeds();
  o.learners = learners_of(j);
  o.degree = static_cast<int>(get_int(j, "degree", o.degree));
  const Json inf = j.contains("inference") ? j.at("inference") : Json::object();
  o.inference = method_of(get_string(inf, "method", "sandwich"));
  o.replicates = static_cast<int>(get_int(inf, "replicates", o.replicates));
  const ExperimentResult r = run_delta_sweep(c, o);
  ctx.write("results.csv", to_text([&](std::ostream& s) { write_results_csv(r, s); }));
  ctx.write_json("metadata.json", r.metadata);
  ctx.summary = {{"rows", r.rows.size()}};
}

void cmd_benchmark(Context& ctx) {
  const std::uint64_t seed = ctx.seed();
  const NuisanceLearners learners = learners_of(ctx.config);
  Json meta;
  meta["tool_version"] = kToolVersion;
  Dataset d;
  if (ctx.config.contains("input")) {
    const IngestResult in = load_input(ctx);
    meta["dataset"] = ingest_summary(in);
    d = in.dataset;
  } else {
    const DgpConfig c = dgp_of(ctx);
    auto [sim, truth] = generate(c);
    meta["dgp"] = to_json(c);
    meta["true_delta_max"] = truth.true_delta_max;
    meta["true_delta_mean"] = truth.true_delta_mean;
    d = std::move(sim);
  }
  const DeltaBenchmark b = run_benchmark(d, ctx.config, learners, seed);
  ctx.write("benchmark.csv", to_text([&](std::ostream& s) { write_benchmark_csv(b, s); }));
  meta["delta_hat"] = b.delta_hat;
  meta["benchmark"] = to_json(b);
  meta["holdout_size"] = get_int(ctx.config, "holdout_size", 1);
  meta["seed"] = seed;
  meta["learner"] = to_json(learners.outcome);
  ctx.write_json("benchmark.json", meta);
  ctx.summary = {{"delta_hat", b.delta_hat}, {"subsets", b.subsets.size()}};
}

}  // namespace ecobounds::cli
