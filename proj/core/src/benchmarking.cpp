#include "ecobounds/benchmarking.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "ecobounds/error.hpp"
#include "ecobounds/inference.hpp"
#include "ecobounds/parallel.hpp"

namespace ecobounds {

std::string BenchmarkStatistic::describe() const {
  if (kind == Kind::mean_abs) return "mean-abs";
  return "quantile(" + format_double(q) + ")";
}

BenchmarkStatistic BenchmarkStatistic::parse(const std::string& text) {
  if (text == "mean-abs" || text == "mean_abs") return mean_abs();
  const std::string prefix = "quantile(";
  if (text.rfind(prefix, 0) == 0 && text.back() == ')') {
    const std::string inner = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    try {
      std::size_t pos = 0;
      const double q = std::stod(inner, &pos);
      if (pos == inner.size() && q >= 0.0 && q <= 1.0) return quantile_of(q);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("unknown benchmark statistic: " + text);
}

std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  std::vector<std::vector<std::size_t>> out;
  if (k > n) return out;
  std::vector<std::size_t> c(k);
  for (std::size_t i = 0; i < k; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    std::size_t i = k;
    while (i > 0 && c[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++c[i - 1];
    for (std::size_t j = i; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

namespace {

Vector select(const Vector& v, const std::vector<std::size_t>& cols) {
  Vector out(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out[static_cast<Eigen::Index>(j)] = v[static_cast<Eigen::Index>(cols[j])];
  return out;
}

struct ArmData {
  std::vector<Vector> v[2];
  std::vector<double> y[2];
};

std::function<double(const Vector&)> cate_model(const ArmData& arms, const std::vector<std::size_t>& cols,
                                                const LearnerSpec& spec) {
  ScalarFn mu[2];
  for (int a = 0; a < 2; ++a) {
    std::vector<Vector> x;
    x.reserve(arms.v[a].size());
    for (const auto& v : arms.v[a]) x.push_back(select(v, cols));
    const Vector y = Eigen::Map<const Vector>(arms.y[a].data(), static_cast<Eigen::Index>(arms.y[a].size()));
    mu[a] = fit_regression(x, y, spec);
  }
  return [mu0 = mu[0], mu1 = mu[1], cols](const Vector& v) {
    const Vector s = select(v, cols);
    return mu1(s) - mu0(s);
  };
}

}  // namespace

DeltaBenchmark benchmark_delta(const Dataset& d, std::size_t holdout_size, const LearnerSpec& outcome,
                               BenchmarkStatistic statistic, std::uint64_t seed) {
  (void)seed;  // the plug-in regressions are deterministic
  if (holdout_size == 0) throw ConfigError("holdout_size must be at least 1");
  std::vector<std::size_t> eligible;
  for (std::size_t j = 0; j < d.dim_v(); ++j) {
    if (j < d.columns.v_discrete.size() && d.columns.v_discrete[j]) eligible.push_back(j);
  }
  if (eligible.empty()) throw ConfigError("no eligible discrete columns in V");
  if (holdout_size > eligible.size()) throw ConfigError("holdout_size exceeds the number of discrete V columns");
  if (statistic.kind == BenchmarkStatistic::Kind::quantile && (statistic.q < 0.0 || statistic.q > 1.0)) {
    throw ConfigError("quantile must lie in [0, 1]");
  }

  ArmData arms;
  std::vector<const Vector*> target;
  for (const auto& s : d.samples) {
    if (s.e) {
      arms.v[*s.a].push_back(s.v);
      arms.y[*s.a].push_back(*s.y);
    } else {
      target.push_back(&s.v);
    }
  }
  if (arms.v[0].empty() || arms.v[1].empty()) throw DataError("positivity violation in sample");
  if (target.empty()) throw DataError("no target units to benchmark on");

  std::vector<std::size_t> all(d.dim_v());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  const auto full = cate_model(arms, all, outcome);

  const auto subsets = combinations(eligible.size(), holdout_size);
  DeltaBenchmark out;
  out.statistic = statistic;
  out.subsets.resize(subsets.size());
  parallel_for(subsets.size(), [&](std::size_t s) {
    SubsetStat& stat = out.subsets[s];
    stat.id = s;
    for (std::size_t k : subsets[s]) {
      stat.held_out.push_back(eligible[k]);
      stat.held_out_names.push_back(d.columns.v_names[eligible[k]]);
    }
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < d.dim_v(); ++j) {
      if (std::find(stat.held_out.begin(), stat.held_out.end(), j) == stat.held_out.end()) kept.push_back(j);
    }
    const auto restricted = cate_model(arms, kept, outcome);
    std::vector<double> gaps;
    gaps.reserve(target.size());
    for (const Vector* v : target) gaps.push_back(std::abs(full(*v) - restricted(*v)));
    if (statistic.kind == BenchmarkStatistic::Kind::mean_abs) {
      stat.value = chunked_sum(
                       gaps.size(), 0.0,
                       [&](std::size_t b, std::size_t e) {
                         double acc = 0.0;
                         for (std::size_t i = b; i < e; ++i) acc += gaps[i];
                         return acc;
                       }) /
                   static_cast<double>(gaps.size());
    } else {
      stat.value = quantile(gaps, statistic.q);
    }
  });

  double sum = 0.0;
  out.min = out.subsets.front().value;
  out.max = out.min;
  for (const auto& s : out.subsets) {
    sum += s.value;
    out.min = std::min(out.min, s.value);
    out.max = std::max(out.max, s.value);
  }
  const double n = static_cast<double>(out.subsets.size());
  out.delta_hat = sum / n;
  double ss = 0.0;
  for (const auto& s : out.subsets) ss += (s.value - out.delta_hat) * (s.value - out.delta_hat);
  out.sd = out.subsets.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return out;
}

void write_benchmark_csv(const DeltaBenchmark& b, std::ostream& out) {
  out << "subset_id,held_out,statistic,value\n";
  for (const auto& s : b.subsets) {
    out << s.id << ',';
    for (std::size_t i = 0; i < s.held_out_names.size(); ++i) out << (i ? ";" : "") << s.held_out_names[i];
    out << ',' << b.statistic.describe() << ',' << format_double(s.value) << '\n';
  }
}

}  // namespace ecobounds
