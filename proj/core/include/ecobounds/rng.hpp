#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ecobounds {

// Mixes a base seed with a stream index; used to give every replicate,
// fold and component its own independent generator.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t sub);

// Portable generator: the engine is std::mt19937_64 (fully specified by the
// standard) and every distribution is implemented here, so draws are
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next() { return engine_(); }
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t index(std::size_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace ecobounds
