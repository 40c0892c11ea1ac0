#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

#include "ecobounds/error.hpp"
#include "ecobounds/nuisance.hpp"
#include "ecobounds/rng.hpp"

namespace ecobounds {

namespace {

struct Noise {
  bool smooth = false;
  Vector omega;
  double phase = 0.0;
  double scale = 1.0;

  double operator()(const Vector& v) const {
    if (!smooth) return 1.0;
    return scale * std::cos(omega.dot(v) + phase);
  }
};

Noise make_noise(NoiseShape shape, std::uint64_t seed, const std::vector<Vector>& reference, Eigen::Index dim) {
  Noise n;
  if (shape == NoiseShape::constant_shift) return n;
  n.smooth = true;
  Rng rng(seed);
  n.omega.resize(dim);
  for (Eigen::Index j = 0; j < dim; ++j) n.omega[j] = rng.normal();
  n.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
  if (reference.empty()) throw ConfigError("smooth perturbation needs a reference sample");
  double mad = 0.0;
  for (const auto& v : reference) mad += std::abs(std::cos(n.omega.dot(v) + n.phase));
  mad /= static_cast<double>(reference.size());
  n.scale = mad > 0.0 ? 1.0 / mad : 1.0;
  return n;
}

Vector make_contrast(std::size_t k, std::uint64_t seed) {
  Rng rng(seed);
  Vector c(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] = rng.normal();
  c.array() -= c.mean();
  const double l1 = c.cwiseAbs().sum();
  if (l1 > 0.0) c *= 2.0 / l1;
  return c;
}

}  // namespace

PerturbationResult perturb(const NuisanceSet& eta, const PerturbationSpec& spec, const std::vector<Vector>& reference) {
  if (!(spec.magnitude >= 0.0)) throw ConfigError("perturbation magnitude must be >= 0");
  PerturbationResult out{eta, {}};
  if (spec.magnitude == 0.0) {
    for (auto c : spec.targets) out.realized.push_back({c, 0.0});
    return out;
  }
  const Eigen::Index dim = reference.empty() ? 0 : reference.front().size();
  const double eps = spec.magnitude * spec.sign;
  for (std::size_t t = 0; t < spec.targets.size(); ++t) {
    const NuisanceComponent c = spec.targets[t];
    const auto stream = static_cast<std::uint64_t>(c);
    const Noise noise = make_noise(spec.shape, derive_seed(spec.seed, stream, 1), reference, dim);
    if (c == NuisanceComponent::nu) {
      const LevelFn base = out.eta.raw_nu();
      const std::size_t k = out.eta.levels();
      const double clip = out.eta.eps();
      const Vector contrast = make_contrast(k, derive_seed(spec.seed, stream, 2));
      out.eta = out.eta.with_nu([base, k, clip, contrast, noise, eps](const Vector& v) {
        Vector p = base(v);
        clip_to_simplex(p.data(), k, clip);
        return Vector(p + eps * noise(v) * contrast);
      });
    } else if (c == NuisanceComponent::mu0 || c == NuisanceComponent::mu1) {
      const ScalarFn base = out.eta.raw(c);
      out.eta = out.eta.with(c, [base, noise, eps](const Vector& v) { return base(v) + eps * noise(v); });
    } else {
      const ScalarFn base = out.eta.raw(c);
      out.eta = out.eta.with(c, [base, noise, eps](const Vector& v) {
        return std::clamp(base(v), 0.0, 1.0) + eps * noise(v);
      });
    }
  }
  for (auto c : spec.targets) {
    double dev = 0.0;
    for (const auto& v : reference) {
      const NuisancePoint before = eta.evaluate(v);
      const NuisancePoint after = out.eta.evaluate(v);
      switch (c) {
        case NuisanceComponent::mu0:
          dev += std::abs(after.mu0 - before.mu0);
          break;
        case NuisanceComponent::mu1:
          dev += std::abs(after.mu1 - before.mu1);
          break;
        case NuisanceComponent::rho0:
          dev += std::abs(after.rho0 - before.rho0);
          break;
        case NuisanceComponent::treatment:
          dev += std::abs(after.study_treatment() - before.study_treatment());
          break;
        case NuisanceComponent::nu:
          dev += 0.5 * (after.nu - before.nu).cwiseAbs().sum();
          break;
      }
    }
    out.realized.push_back({c, reference.empty() ? 0.0 : dev / static_cast<double>(reference.size())});
  }
  return out;
}

}  // namespace ecobounds
