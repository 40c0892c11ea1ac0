#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ecobounds/data_model.hpp"
#include "ecobounds/nuisance.hpp"

namespace ecobounds {

struct BenchmarkStatistic {
  enum class Kind { mean_abs, quantile } kind = Kind::mean_abs;
  double q = 1.0;

  static BenchmarkStatistic mean_abs() { return {}; }
  static BenchmarkStatistic quantile_of(double q) { return {Kind::quantile, q}; }
  std::string describe() const;
  static BenchmarkStatistic parse(const std::string& text);
};

struct SubsetStat {
  std::size_t id = 0;
  std::vector<std::size_t> held_out;  // indices into the V columns
  std::vector<std::string> held_out_names;
  double value = 0.0;
};

struct DeltaBenchmark {
  std::vector<SubsetStat> subsets;
  BenchmarkStatistic statistic;
  double delta_hat = 0.0;
  double min = 0.0;
  double max = 0.0;
  double sd = 0.0;
};

// All size-k subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k);

DeltaBenchmark benchmark_delta(const Dataset& d, std::size_t holdout_size, const LearnerSpec& outcome,
                               BenchmarkStatistic statistic = {}, std::uint64_t seed = 0);

void write_benchmark_csv(const DeltaBenchmark& b, std::ostream& out);

}  // namespace ecobounds
