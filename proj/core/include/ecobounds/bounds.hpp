#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ecobounds/data_model.hpp"
#include "ecobounds/nuisance.hpp"

namespace ecobounds {

struct BoundPair {
  double gamma_lower = 0.0;
  double gamma_upper = 0.0;
  double tau_lower = 0.0;
  double tau_upper = 0.0;
  bool clipped_lower = false;
  bool clipped_upper = false;
  bool thin_cell = false;  // nu below the probability clip

  double width() const { return gamma_upper - gamma_lower; }
};

struct SensitivityLevel {
  double delta = 0.0;
};

BoundPair theorem1_bounds(double delta_mu, double nu, const OutcomeBounds& bounds,
                          double eps_p = kDefaultProbabilityClip);

BoundPair sensitivity_bounds(double delta_mu, double nu, const OutcomeBounds& bounds, SensitivityLevel level,
                             double eps_p = kDefaultProbabilityClip);

struct BoundRow {
  std::size_t unit = 0;  // index into the dataset
  std::size_t w_level = 0;
  double nu = 0.0;
  BoundPair bounds;
  std::optional<std::string> error;
};

// One row per (target unit, W level), units in dataset order and levels in
// support order.
std::vector<BoundRow> pointwise_bounds(const Dataset& dataset, const NuisanceSet& eta,
                                       std::optional<SensitivityLevel> level = std::nullopt);

void write_bounds_csv(const std::vector<BoundRow>& rows, std::ostream& out);

}  // namespace ecobounds
