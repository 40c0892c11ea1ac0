#include <algorithm>
#include <cmath>

#include "ecobounds/error.hpp"
#include "ecobounds/estimator.hpp"

namespace ecobounds {

const char* to_string(Side side) { return side == Side::lower ? "lower" : "upper"; }

Side parse_side(const std::string& name) {
  if (name == "lower") return Side::lower;
  if (name == "upper") return Side::upper;
  throw ConfigError("unknown side '" + name + "'");
}

const char* to_string(ProjectionPopulation p) { return p == ProjectionPopulation::target ? "target" : "pooled"; }

ProjectionPopulation parse_population(const std::string& name) {
  if (name == "target") return ProjectionPopulation::target;
  if (name == "pooled") return ProjectionPopulation::pooled;
  throw ConfigError("unknown projection population '" + name + "'");
}

const char* to_string(EstimatorKind k) { return k == EstimatorKind::plugin ? "plugin" : "bias-corrected"; }

const char* to_string(CovarianceMethod m) { return m == CovarianceMethod::sandwich ? "sandwich" : "bootstrap"; }

void ModelSpec::check(const OutcomeBounds& bounds) const {
  if (degree < 0) throw ConfigError("model degree must be >= 0");
  if (delta && !(*delta >= 0.0 && *delta <= bounds.b - bounds.a)) {
    throw ConfigError("sensitivity level must lie in [0, b-a]");
  }
}

Design::Design(const Dataset& dataset, const ModelSpec& spec)
    : spec_(spec),
      bounds_(dataset.bounds),
      levels_(dataset.w_support.size()),
      encoder_(dataset.w_support, dataset.dim_v(), spec.intercept) {
  spec_.check(bounds_);
  const std::size_t p = encoder_.dim();
  binary_.assign(p, true);
  for (std::size_t j = 0; j < dataset.dim_v(); ++j) {
    for (const auto& s : dataset.samples) {
      const double x = s.v[static_cast<Eigen::Index>(j)];
      if (x != 0.0 && x != 1.0) {
        binary_[j] = false;
        break;
      }
    }
  }
  if (spec_.nonlinear) {
    dim_ = spec_.nonlinear->dim(p);
  } else if (spec_.degree == 0) {
    dim_ = 1;
  } else {
    dim_ = p;
    for (std::size_t j = 0; j < p; ++j) {
      if (!binary_[j]) dim_ += static_cast<std::size_t>(spec_.degree - 1);
    }
  }
}

void Design::x(const Vector& v, std::size_t w, Vector& out) const {
  out.resize(static_cast<Eigen::Index>(encoder_.dim()));
  encoder_.encode_into(v, w, out.data());
}

void Design::basis(const Vector& x, Vector& out) const {
  out.resize(static_cast<Eigen::Index>(dim_));
  if (spec_.degree == 0) {
    out[0] = 1.0;
    return;
  }
  const auto p = static_cast<Eigen::Index>(encoder_.dim());
  out.head(p) = x;
  Eigen::Index k = p;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (binary_[static_cast<std::size_t>(j)]) continue;
    double pw = x[j];
    for (int d = 2; d <= spec_.degree; ++d) {
      pw *= x[j];
      out[k++] = pw;
    }
  }
}

double Design::model(const Vector& x, const Vector& beta) const {
  if (spec_.nonlinear) return spec_.nonlinear->value(x, beta);
  Vector b;
  basis(x, b);
  return b.dot(beta);
}

void Design::model_gradient(const Vector& x, const Vector& beta, Vector& out) const {
  if (spec_.nonlinear) {
    out = spec_.nonlinear->gradient(x, beta);
    return;
  }
  basis(x, out);
}

BoundPiece select_piece(Side side, std::optional<double> delta, double dmu, double nu, const OutcomeBounds& bounds,
                        double tau_shift) {
  const double range = bounds.b - bounds.a;
  struct Cand {
    BoundPiece piece;
    double value;
  };
  Cand cands[4];
  int n = 0;
  if (side == Side::lower) {
    if (delta) {
      cands[n++] = {BoundPiece::tau_delta, dmu - *delta * (1.0 - nu) / nu + tau_shift};
      cands[n++] = {BoundPiece::contrast_delta, dmu - *delta};
    }
    cands[n++] = {BoundPiece::tau, (dmu - range * (1.0 - nu)) / nu + tau_shift};
    cands[n++] = {BoundPiece::range, -range};
    int best = 0;
    for (int i = 1; i < n; ++i) {
      if (cands[i].value > cands[best].value) best = i;
    }
    return cands[best].piece;
  }
  if (delta) {
    cands[n++] = {BoundPiece::tau_delta, dmu + *delta * (1.0 - nu) / nu + tau_shift};
    cands[n++] = {BoundPiece::contrast_delta, dmu + *delta};
  }
  cands[n++] = {BoundPiece::tau, (dmu + range * (1.0 - nu)) / nu + tau_shift};
  cands[n++] = {BoundPiece::range, range};
  int best = 0;
  for (int i = 1; i < n; ++i) {
    if (cands[i].value < cands[best].value) best = i;
  }
  return cands[best].piece;
}

PieceValue evaluate_piece(BoundPiece piece, Side side, std::optional<double> delta, double dmu, double nu,
                          const OutcomeBounds& bounds) {
  const double range = bounds.b - bounds.a;
  const double sgn = side == Side::lower ? -1.0 : 1.0;
  const double d = delta.value_or(0.0);
  PieceValue out;
  switch (piece) {
    case BoundPiece::tau:
      out.value = (dmu + sgn * range * (1.0 - nu)) / nu;
      out.d_delta_mu = 1.0 / nu;
      out.d_nu = -(dmu + sgn * range) / (nu * nu);
      break;
    case BoundPiece::range:
      out.value = sgn * range;
      break;
    case BoundPiece::tau_delta:
      out.value = dmu + sgn * d * (1.0 - nu) / nu;
      out.d_delta_mu = 1.0;
      out.d_nu = -sgn * d / (nu * nu);
      break;
    case BoundPiece::contrast_delta:
      out.value = dmu + sgn * d;
      out.d_delta_mu = 1.0;
      break;
  }
  return out;
}

int indicator(double tau_hat, Side side, const OutcomeBounds& bounds) {
  const double range = bounds.b - bounds.a;
  if (side == Side::lower) return tau_hat + range >= 0.0 ? 1 : 0;
  return tau_hat - range <= 0.0 ? 1 : 0;
}

IndicatorFn::IndicatorFn(NuisanceSet eta, Side side, std::optional<double> delta, OutcomeBounds bounds, double tau_shift)
    : eta_(std::move(eta)), side_(side), delta_(delta), bounds_(bounds), shift_(tau_shift) {}

BoundPiece IndicatorFn::piece(const Vector& v, std::size_t w) const {
  const NuisancePoint p = eta_.evaluate(v);
  return select_piece(side_, delta_, p.delta_mu(), p.nu[static_cast<Eigen::Index>(w)], bounds_, shift_);
}

int IndicatorFn::operator()(const Vector& v, std::size_t w) const { return piece(v, w) == BoundPiece::range ? 0 : 1; }

MarginDiagnostic margin_diagnostic(const Dataset& d, const NuisanceSet& eta, Side side, const std::vector<double>& t_grid) {
  if (t_grid.empty()) throw ConfigError("margin diagnostic needs a non-empty t grid");
  const double range = d.bounds.b - d.bounds.a;
  std::vector<double> margin;
  for (const auto& s : d.samples) {
    if (s.e) continue;
    const NuisancePoint p = eta.evaluate(s.v);
    const double nu = p.nu[static_cast<Eigen::Index>(*s.w)];
    const double tau = side == Side::lower ? (p.delta_mu() - range * (1.0 - nu)) / nu
                                           : (p.delta_mu() + range * (1.0 - nu)) / nu;
    margin.push_back(std::abs(side == Side::lower ? tau + range : tau - range));
  }
  std::sort(margin.begin(), margin.end());
  MarginDiagnostic out;
  std::vector<double> lx, ly;
  for (double t : t_grid) {
    const auto count = std::upper_bound(margin.begin(), margin.end(), t) - margin.begin();
    const double frac = margin.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(margin.size());
    out.t.push_back(t);
    out.fraction.push_back(frac);
    if (frac > 0.0 && t > 0.0) {
      lx.push_back(std::log(t));
      ly.push_back(std::log(frac));
    }
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      mx += lx[i];
      my += ly[i];
    }
    mx /= static_cast<double>(lx.size());
    my /= static_cast<double>(lx.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx > 0) out.alpha_hat = sxy / sxx;
  }
  return out;
}

}  // namespace ecobounds
