#include "ecobounds/bounds.hpp"

#include <algorithm>
#include <ostream>

#include "ecobounds/error.hpp"
#include "ecobounds/parallel.hpp"

namespace ecobounds {

BoundPair theorem1_bounds(double delta_mu, double nu, const OutcomeBounds& bounds, double eps_p) {
  if (!(nu > 0.0)) throw DataError("empty cell");
  const double range = bounds.b - bounds.a;
  BoundPair p;
  p.tau_lower = (delta_mu - range * (1.0 - nu)) / nu;
  p.tau_upper = (delta_mu + range * (1.0 - nu)) / nu;
  p.clipped_lower = p.tau_lower < -range;
  p.clipped_upper = p.tau_upper > range;
  p.gamma_lower = p.clipped_lower ? -range : p.tau_lower;
  p.gamma_upper = p.clipped_upper ? range : p.tau_upper;
  p.thin_cell = nu < eps_p;
  return p;
}

BoundPair sensitivity_bounds(double delta_mu, double nu, const OutcomeBounds& bounds, SensitivityLevel level,
                             double eps_p) {
  const double range = bounds.b - bounds.a;
  if (!(level.delta >= 0.0 && level.delta <= range)) throw ConfigError("sensitivity level must lie in [0, b-a]");
  const BoundPair t1 = theorem1_bounds(delta_mu, nu, bounds, eps_p);
  const double d = level.delta;
  BoundPair p;
  p.thin_cell = t1.thin_cell;
  // Same as (dmu - (dmu + d)(1 - nu)) / nu, arranged to be exact at d = 0.
  const double slack = d * (1.0 - nu) / nu;
  p.tau_lower = delta_mu - slack;
  p.tau_upper = delta_mu + slack;
  const double lower = std::max(std::max(p.tau_lower, delta_mu - d), t1.gamma_lower);
  const double upper = std::min(std::min(p.tau_upper, delta_mu + d), t1.gamma_upper);
  p.gamma_lower = lower;
  p.gamma_upper = upper;
  p.clipped_lower = lower != p.tau_lower;
  p.clipped_upper = upper != p.tau_upper;
  return p;
}

std::vector<BoundRow> pointwise_bounds(const Dataset& dataset, const NuisanceSet& eta,
                                       std::optional<SensitivityLevel> level) {
  std::vector<std::size_t> units;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (!dataset.samples[i].e) units.push_back(i);
  }
  const std::size_t k = dataset.w_support.size();
  std::vector<BoundRow> rows(units.size() * k);
  parallel_for(units.size(), [&](std::size_t u) {
    const std::size_t i = units[u];
    const NuisancePoint p = eta.evaluate(dataset.samples[i].v);
    for (std::size_t w = 0; w < k; ++w) {
      BoundRow& r = rows[u * k + w];
      r.unit = i;
      r.w_level = w;
      r.nu = p.nu[static_cast<Eigen::Index>(w)];
      try {
        r.bounds = level ? sensitivity_bounds(p.delta_mu(), r.nu, dataset.bounds, *level, eta.eps())
                         : theorem1_bounds(p.delta_mu(), r.nu, dataset.bounds, eta.eps());
      } catch (const DataError& e) {
        r.error = e.what();
      }
    }
  });
  return rows;
}

void write_bounds_csv(const std::vector<BoundRow>& rows, std::ostream& out) {
  out << "unit_id,w_level,gamma_lower,gamma_upper,tau_lower,tau_upper,clipped_lower,clipped_upper,nu\n";
  for (const auto& r : rows) {
    out << r.unit << ',' << r.w_level << ',';
    if (r.error) {
      out << ",,,,,," << format_double(r.nu) << '\n';
      continue;
    }
    out << format_double(r.bounds.gamma_lower) << ',' << format_double(r.bounds.gamma_upper) << ','
        << format_double(r.bounds.tau_lower) << ',' << format_double(r.bounds.tau_upper) << ','
        << (r.bounds.clipped_lower ? 1 : 0) << ',' << (r.bounds.clipped_upper ? 1 : 0) << ',' << format_double(r.nu)
        << '\n';
  }
}

}  // namespace ecobounds
