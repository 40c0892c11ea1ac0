#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ecobounds/data_model.hpp"
#include "ecobounds/nuisance.hpp"
#include "ecobounds/rng.hpp"
#include "ecobounds/simulation.hpp"

namespace ecotest {

using ecobounds::Dataset;
using ecobounds::ObservedSample;
using ecobounds::Vector;

// Scalar V, binary W (levels {0}, {1}), bounds [0,1].
inline Dataset toy_dataset(std::size_t n, std::uint64_t seed) {
  Dataset d;
  d.bounds = {0.0, 1.0};
  d.w_support = ecobounds::WSupport({{0.0}, {1.0}});
  d.columns.v_names = {"v"};
  d.columns.v_discrete = {false};
  d.columns.w_names = {"w"};
  ecobounds::Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    ObservedSample s;
    s.v = Vector::Constant(1, rng.uniform());
    s.e = i % 2 == 1;
    if (s.e) {
      s.a = rng.bernoulli(0.5) ? 1 : 0;
      s.y = std::min(1.0, std::max(0.0, 0.3 * s.v[0] + 0.2 * *s.a + 0.2 * rng.uniform()));
    } else {
      s.w = rng.bernoulli(0.3 + 0.4 * s.v[0]) ? 1 : 0;
    }
    d.samples.push_back(s);
  }
  return d;
}

inline ecobounds::DgpConfig small_dgp(std::size_t n, std::uint64_t seed) {
  ecobounds::DgpConfig c;
  c.n = n;
  c.seed = seed;
  return c;
}

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace ecotest
