#pragma once

#include <nlohmann/json.hpp>

#include "ecobounds/benchmarking.hpp"
#include "ecobounds/data_model.hpp"
#include "ecobounds/estimator.hpp"
#include "ecobounds/nuisance.hpp"
#include "ecobounds/simulation.hpp"

namespace ecobounds {

using Json = nlohmann::ordered_json;

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Vector vector_from_json(const Json& j);

Json to_json(const OutcomeBounds& b);
OutcomeBounds bounds_from_json(const Json& j);

Json to_json(const LearnerSpec& s);
LearnerSpec learner_from_json(const Json& j);
Json to_json(const NuisanceLearners& l);
// Accepts either a single learner spec or {outcome, propensity, w_model}.
NuisanceLearners learners_from_json(const Json& j);

Json to_json(const ModelSpec& s);
// Reads side, delta, degree, intercept, population and a constant weight.
ModelSpec model_from_json(const Json& j);

Json to_json(const DgpConfig& c);
DgpConfig dgp_from_json(const Json& j);
Json to_json(const DgpCoefficients& c);

Json to_json(const IngestConfig& c);
IngestConfig ingest_from_json(const Json& j);

Json to_json(const Interval& i);
Json to_json(const CovarianceEstimate& c);
Json to_json(const BetaEstimate& b);
Json to_json(const DeltaBenchmark& b);

// Helpers that raise ConfigError with the key name on a type mismatch.
const Json& require_key(const Json& j, const char* key);
double get_double(const Json& j, const char* key, double fallback);
long long get_int(const Json& j, const char* key, long long fallback);
std::uint64_t get_seed(const Json& j, const char* key, std::uint64_t fallback);
bool get_bool(const Json& j, const char* key, bool fallback);
std::string get_string(const Json& j, const char* key, const std::string& fallback);

}  // namespace ecobounds
