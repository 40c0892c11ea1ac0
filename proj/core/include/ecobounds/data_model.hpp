#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ecobounds/linalg.hpp"

namespace ecobounds {

struct OutcomeBounds {
  double a = 0.0;
  double b = 1.0;

  double range() const { return b - a; }
  bool operator==(const OutcomeBounds&) const = default;
};

using WLevel = std::vector<double>;

// Enumerated support of the target-only covariates W. Levels are stored in
// lexicographic order of their raw value-vectors.
class WSupport {
 public:
  WSupport() = default;
  // Sorts lexicographically; throws DataError on duplicates or ragged levels.
  explicit WSupport(std::vector<WLevel> levels);
  // Sorts and removes duplicates.
  static WSupport from_observed(std::vector<WLevel> levels);

  std::size_t size() const { return levels_.size(); }
  std::size_t dim() const { return levels_.empty() ? 0 : levels_.front().size(); }
  const WLevel& level(std::size_t i) const { return levels_.at(i); }
  const std::vector<WLevel>& levels() const { return levels_; }
  std::optional<std::size_t> find(const WLevel& level) const;

  // Binary coordinates map to {0,1}; coordinates with k > 2 values map to
  // k-1 indicators (first value is the reference); constant coordinates
  // are dropped.
  std::size_t encoded_dim() const { return encoded_dim_; }
  Vector encode(std::size_t index) const;
  void encode_into(std::size_t index, double* out) const;

  bool operator==(const WSupport& other) const { return levels_ == other.levels_; }

 private:
  void build_encoding();

  std::vector<WLevel> levels_;
  std::vector<std::vector<double>> coord_values_;
  std::size_t encoded_dim_ = 0;
};

struct ObservedSample {
  Vector v;
  bool e = false;
  std::optional<std::size_t> w;
  std::optional<int> a;
  std::optional<double> y;

  bool operator==(const ObservedSample& o) const {
    return v.size() == o.v.size() && v == o.v && e == o.e && w == o.w && a == o.a && y == o.y;
  }
};

struct ColumnMeta {
  std::vector<std::string> v_names;
  std::vector<bool> v_discrete;
  std::vector<std::string> w_names;

  bool operator==(const ColumnMeta&) const = default;
};

struct Dataset {
  std::vector<ObservedSample> samples;
  OutcomeBounds bounds;
  WSupport w_support;
  ColumnMeta columns;

  std::size_t size() const { return samples.size(); }
  std::size_t dim_v() const { return columns.v_names.size(); }
  std::size_t count_target() const;
  std::size_t count_study() const;
  Dataset subset(const std::vector<std::size_t>& indices) const;

  bool operator==(const Dataset&) const = default;
};

struct Violation {
  std::optional<std::size_t> sample;  // empty for dataset-level rules
  std::string rule;
};

std::vector<Violation> validate(const Dataset& dataset);

// Throws DataError listing the first violations if the dataset is invalid.
void require_valid(const Dataset& dataset);

// Throws DataError unless both populations are present.
void require_both_populations(const Dataset& dataset);

std::pair<Dataset, Dataset> split(const Dataset& dataset, double fraction, std::uint64_t seed);

struct CovariateProfile {
  Vector v;
  std::size_t w_index = 0;
  Vector x;
};

// x = [v; encode(w); 1], the trailing intercept being optional.
class CovariateEncoder {
 public:
  CovariateEncoder(const WSupport& support, std::size_t dim_v, bool intercept = true);

  std::size_t dim() const { return dim_v_ + support_.encoded_dim() + (intercept_ ? 1 : 0); }
  std::size_t dim_v() const { return dim_v_; }
  bool intercept() const { return intercept_; }
  void encode_into(const Vector& v, std::size_t w_index, double* out) const;
  CovariateProfile profile(const Vector& v, std::size_t w_index) const;

 private:
  WSupport support_;
  std::size_t dim_v_;
  bool intercept_;
};

// Column-role map and bounds used to turn a wide CSV into a Dataset.
struct IngestConfig {
  std::vector<std::string> v;
  std::vector<std::string> w;
  std::optional<std::string> e;
  std::string a;
  std::string y;
  OutcomeBounds bounds;
  // Names of discrete V columns. If absent, a column is discrete when it is
  // integer-valued with at most 10 distinct values.
  std::optional<std::vector<std::string>> discrete;
  // Explicit W support; if absent the support is the set of W levels seen
  // on target rows.
  std::optional<std::vector<WLevel>> w_levels;
  // Used only when no population column is given: each complete row is
  // assigned to the target population with this probability.
  double target_fraction = 0.5;
  std::uint64_t target_seed = 0;
};

struct IngestResult {
  Dataset dataset;
  std::size_t rows_read = 0;
  std::size_t rows_dropped = 0;
};

IngestResult ingest_csv(std::istream& in, const IngestConfig& config);
IngestResult ingest_csv_file(const std::string& path, const IngestConfig& config);

// Wide CSV with columns v..., w..., E, A, Y; missing fields are empty cells.
// Numbers use the shortest representation that round-trips exactly.
void write_dataset_csv(const Dataset& dataset, std::ostream& out);

// IngestConfig that reads write_dataset_csv output back into an identical Dataset.
IngestConfig roundtrip_config(const Dataset& dataset);

std::string format_double(double x);

}  // namespace ecobounds
