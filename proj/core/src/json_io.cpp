#include "ecobounds/json_io.hpp"

#include <string>

#include "ecobounds/error.hpp"

namespace ecobounds {

namespace {

template <class T>
T get_as(const Json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("invalid or missing config key: ") + key);
  }
}

void require_object(const Json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
}

UniformRange range_from_json(const Json& j, const char* key, UniformRange fallback) {
  if (!j.contains(key)) return fallback;
  const Json& r = j.at(key);
  if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number()) {
    throw ConfigError(std::string("range must be [lo, hi]: ") + key);
  }
  return {r[0].get<double>(), r[1].get<double>()};
}

Json range_json(const UniformRange& r) { return Json::array({r.lo, r.hi}); }

}  // namespace

const Json& require_key(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing config key: ") + key);
  return j.at(key);
}

double get_double(const Json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw ConfigError(std::string("config key must be a number: ") + key);
  return j.at(key).get<double>();
}

long long get_int(const Json& j, const char* key, long long fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer()) throw ConfigError(std::string("config key must be an integer: ") + key);
  return j.at(key).get<long long>();
}

std::uint64_t get_seed(const Json& j, const char* key, std::uint64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_unsigned()) throw ConfigError(std::string("seed must be a non-negative integer: ") + key);
  return j.at(key).get<std::uint64_t>();
}

bool get_bool(const Json& j, const char* key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(std::string("config key must be a boolean: ") + key);
  return j.at(key).get<bool>();
}

std::string get_string(const Json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_string()) throw ConfigError(std::string("config key must be a string: ") + key);
  return j.at(key).get<std::string>();
}

Json to_json(const Vector& v) {
  Json out = Json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Json to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(row);
  }
  return out;
}

Vector vector_from_json(const Json& j) {
  if (!j.is_array()) throw ConfigError("expected a numeric array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError("expected a numeric array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json to_json(const OutcomeBounds& b) { return Json::array({b.a, b.b}); }

OutcomeBounds bounds_from_json(const Json& j) {
  OutcomeBounds b;
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    b = {j[0].get<double>(), j[1].get<double>()};
  } else if (j.is_object()) {
    b = {get_as<double>(j, "a"), get_as<double>(j, "b")};
  } else {
    throw ConfigError("outcome bounds must be [a, b] or {a, b}");
  }
  if (!(b.a < b.b)) throw ConfigError("outcome bounds need a < b");
  return b;
}

Json to_json(const LearnerSpec& s) {
  Json j;
  j["family"] = to_string(s.family);
  j["degree"] = s.degree;
  if (s.regularization) j["regularization"] = *s.regularization;
  if (s.bandwidth) j["bandwidth"] = *s.bandwidth;
  return j;
}

LearnerSpec learner_from_json(const Json& j) {
  require_object(j, "learner");
  LearnerSpec s;
  s.family = parse_learner_family(get_string(j, "family", to_string(s.family)));
  s.degree = static_cast<int>(get_int(j, "degree", s.degree));
  if (j.contains("regularization")) s.regularization = get_double(j, "regularization", 0.0);
  if (j.contains("bandwidth")) s.bandwidth = get_double(j, "bandwidth", 0.0);
  s.check();
  return s;
}

Json to_json(const NuisanceLearners& l) {
  Json j;
  j["outcome"] = to_json(l.outcome);
  j["propensity"] = to_json(l.propensity);
  j["w_model"] = to_json(l.w_model);
  return j;
}

NuisanceLearners learners_from_json(const Json& j) {
  require_object(j, "learner");
  if (j.contains("family")) return NuisanceLearners::from(learner_from_json(j));
  NuisanceLearners l;
  if (j.contains("outcome")) l.outcome = learner_from_json(j.at("outcome"));
  if (j.contains("propensity")) l.propensity = learner_from_json(j.at("propensity"));
  if (j.contains("w_model")) l.w_model = learner_from_json(j.at("w_model"));
  return l;
}

Json to_json(const ModelSpec& s) {
  Json j;
  j["side"] = to_string(s.side);
  j["delta"] = s.delta ? Json(*s.delta) : Json(nullptr);
  j["degree"] = s.degree;
  j["intercept"] = s.intercept;
  j["population"] = to_string(s.population);
  return j;
}

ModelSpec model_from_json(const Json& j) {
  require_object(j, "model");
  ModelSpec s;
  s.side = parse_side(get_string(j, "side", "lower"));
  if (j.contains("delta") && !j.at("delta").is_null()) s.delta = get_double(j, "delta", 0.0);
  s.degree = static_cast<int>(get_int(j, "degree", 1));
  s.intercept = get_bool(j, "intercept", true);
  s.population = parse_population(get_string(j, "population", "target"));
  if (j.contains("weight")) {
    const double h = get_double(j, "weight", 1.0);
    if (!(h > 0.0)) throw ConfigError("weight must be positive");
    s.weight = [h](const Vector&) { return h; };
  }
  return s;
}

Json to_json(const DgpConfig& c) {
  Json j;
  j["n"] = c.n;
  j["n_continuous"] = c.n_continuous;
  j["n_discrete"] = c.n_discrete;
  j["n_w"] = c.n_w;
  j["continuous_mean"] = c.continuous_mean;
  j["continuous_sd"] = c.continuous_sd;
  j["discrete_p"] = c.discrete_p;
  j["w_coef"] = range_json(c.w_coef);
  j["e_coef"] = range_json(c.e_coef);
  j["a_coef"] = range_json(c.a_coef);
  j["effect_coef"] = range_json(c.effect_coef);
  j["outcome_coef"] = range_json(c.outcome_coef);
  j["noise_sd"] = c.noise_sd;
  j["seed"] = c.seed;
  j["coefficient_seed"] = c.coefficient_seed ? Json(*c.coefficient_seed) : Json(nullptr);
  j["w_dependence_scale"] = c.w_dependence_scale;
  j["w_effect_scale"] = c.w_effect_scale;
  j["outcome_bounds"] = c.outcome_bounds ? to_json(*c.outcome_bounds) : Json(nullptr);
  j["bound_slack"] = c.bound_slack;
  return j;
}

DgpConfig dgp_from_json(const Json& j) {
  require_object(j, "dgp");
  DgpConfig c;
  const auto count = [&](const char* key, std::size_t fallback) {
    const long long v = get_int(j, key, static_cast<long long>(fallback));
    if (v < 0) throw ConfigError(std::string("config key must be non-negative: ") + key);
    return static_cast<std::size_t>(v);
  };
  c.n = count("n", c.n);
  c.n_continuous = count("n_continuous", c.n_continuous);
  c.n_discrete = count("n_discrete", c.n_discrete);
  c.n_w = count("n_w", c.n_w);
  c.continuous_mean = get_double(j, "continuous_mean", c.continuous_mean);
  c.continuous_sd = get_double(j, "continuous_sd", c.continuous_sd);
  c.discrete_p = get_double(j, "discrete_p", c.discrete_p);
  c.w_coef = range_from_json(j, "w_coef", c.w_coef);
  c.e_coef = range_from_json(j, "e_coef", c.e_coef);
  c.a_coef = range_from_json(j, "a_coef", c.a_coef);
  c.effect_coef = range_from_json(j, "effect_coef", c.effect_coef);
  c.outcome_coef = range_from_json(j, "outcome_coef", c.outcome_coef);
  c.noise_sd = get_double(j, "noise_sd", c.noise_sd);
  c.seed = get_seed(j, "seed", c.seed);
  if (j.contains("coefficient_seed") && !j.at("coefficient_seed").is_null()) {
    c.coefficient_seed = get_seed(j, "coefficient_seed", 0);
  }
  c.w_dependence_scale = get_double(j, "w_dependence_scale", c.w_dependence_scale);
  c.w_effect_scale = get_double(j, "w_effect_scale", c.w_effect_scale);
  if (j.contains("outcome_bounds") && !j.at("outcome_bounds").is_null()) {
    c.outcome_bounds = bounds_from_json(j.at("outcome_bounds"));
  }
  c.bound_slack = get_double(j, "bound_slack", c.bound_slack);
  c.check();
  return c;
}

Json to_json(const DgpCoefficients& c) {
  Json j;
  j["w_logit"] = to_json(c.w_logit);
  j["e_logit"] = to_json(c.e_logit);
  j["a_logit"] = to_json(c.a_logit);
  j["effect_v"] = to_json(c.effect_v);
  j["effect_w"] = to_json(c.effect_w);
  j["outcome_v"] = to_json(c.outcome_v);
  j["outcome_w"] = to_json(c.outcome_w);
  return j;
}

Json to_json(const IngestConfig& c) {
  Json j;
  j["v"] = c.v;
  j["w"] = c.w;
  j["e"] = c.e ? Json(*c.e) : Json(nullptr);
  j["a"] = c.a;
  j["y"] = c.y;
  j["bounds"] = to_json(c.bounds);
  j["discrete"] = c.discrete ? Json(*c.discrete) : Json(nullptr);
  j["w_levels"] = c.w_levels ? Json(*c.w_levels) : Json(nullptr);
  j["target_fraction"] = c.target_fraction;
  j["target_seed"] = c.target_seed;
  return j;
}

IngestConfig ingest_from_json(const Json& j) {
  require_object(j, "columns");
  IngestConfig c;
  c.v = get_as<std::vector<std::string>>(j, "v");
  if (j.contains("w")) c.w = get_as<std::vector<std::string>>(j, "w");
  if (j.contains("e") && !j.at("e").is_null()) c.e = get_as<std::string>(j, "e");
  c.a = get_as<std::string>(j, "a");
  c.y = get_as<std::string>(j, "y");
  c.bounds = bounds_from_json(require_key(j, "bounds"));
  if (j.contains("discrete") && !j.at("discrete").is_null()) c.discrete = get_as<std::vector<std::string>>(j, "discrete");
  if (j.contains("w_levels") && !j.at("w_levels").is_null()) c.w_levels = get_as<std::vector<WLevel>>(j, "w_levels");
  c.target_fraction = get_double(j, "target_fraction", c.target_fraction);
  c.target_seed = get_seed(j, "target_seed", c.target_seed);
  return c;
}

Json to_json(const Interval& i) { return Json::array({i.lower, i.upper}); }

Json to_json(const CovarianceEstimate& c) {
  Json j;
  j["method"] = to_string(c.method);
  j["covariance"] = to_json(c.covariance);
  Json iv = Json::array();
  for (const auto& i : c.intervals) iv.push_back(to_json(i));
  j["intervals"] = iv;
  j["replicates"] = c.replicates ? Json(*c.replicates) : Json(nullptr);
  j["retries"] = c.retries;
  j["failed"] = c.failed;
  j["ridge_applied"] = c.ridge_applied;
  return j;
}

Json to_json(const BetaEstimate& b) {
  Json j;
  j["side"] = to_string(b.side);
  j["delta"] = b.delta ? Json(*b.delta) : Json(nullptr);
  j["estimator"] = to_string(b.kind);
  j["beta"] = to_json(b.beta);
  j["moment_residual"] = b.moment_residual;
  j["n_used"] = b.n_used;
  j["seed"] = b.seed ? Json(*b.seed) : Json(nullptr);
  j["learner"] = b.learner_fingerprint;
  j["ridge_applied"] = b.ridge_applied;
  j["warnings"] = b.warnings;
  j["covariance"] = b.covariance ? to_json(*b.covariance) : Json(nullptr);
  return j;
}

Json to_json(const DeltaBenchmark& b) {
  Json j;
  j["statistic"] = b.statistic.describe();
  j["delta_hat"] = b.delta_hat;
  j["subsets"] = b.subsets.size();
  j["min"] = b.min;
  j["max"] = b.max;
  j["sd"] = b.sd;
  return j;
}

}  // namespace ecobounds
