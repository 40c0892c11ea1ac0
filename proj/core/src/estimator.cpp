#include "ecobounds/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "ecobounds/error.hpp"
#include "ecobounds/inference.hpp"
#include "ecobounds/parallel.hpp"

namespace ecobounds {

namespace {

struct UnitContext {
  NuisancePoint point;
  std::vector<PieceValue> pieces;  // per level
  double residual = 0.0;           // signed IPW outcome residual, e = 1 only
};

UnitContext make_context(const ObservedSample& s, const NuisanceSet& eta, const Design& design, IndicatorSource ind) {
  UnitContext ctx;
  ctx.point = eta.evaluate(s.v);
  const NuisancePoint* q = &ctx.point;
  NuisancePoint qp;
  if (ind.eta) {
    qp = ind.eta->evaluate(s.v);
    q = &qp;
  }
  const ModelSpec& spec = design.spec();
  const std::size_t k = design.levels();
  ctx.pieces.resize(k);
  for (std::size_t w = 0; w < k; ++w) {
    const auto wi = static_cast<Eigen::Index>(w);
    const BoundPiece piece = select_piece(spec.side, spec.delta, q->delta_mu(), q->nu[wi], design.bounds(), ind.tau_shift);
    ctx.pieces[w] = evaluate_piece(piece, spec.side, spec.delta, ctx.point.delta_mu(), ctx.point.nu[wi], design.bounds());
  }
  if (s.e) {
    const double y = *s.y;
    ctx.residual = *s.a == 1 ? (y - ctx.point.mu1) / ctx.point.pi1 : -(y - ctx.point.mu0) / ctx.point.pi0;
  }
  return ctx;
}

bool unit_used(const ObservedSample& s, const Design& design, EstimatorKind kind) {
  return !s.e || kind == EstimatorKind::bias_corrected || design.spec().population == ProjectionPopulation::pooled;
}

// Correction terms (independent of beta in the linear case) accumulated into out,
// with g_w supplied per level.
void add_corrections(const ObservedSample& s, const UnitContext& ctx, const std::vector<Vector>& g, bool pooled,
                     Vector& out) {
  const std::size_t k = g.size();
  const NuisancePoint& p = ctx.point;
  if (s.e) {
    const double scale = pooled ? ctx.residual : p.rho0 * ctx.residual;
    for (std::size_t w = 0; w < k; ++w) {
      const double c = scale * p.nu[static_cast<Eigen::Index>(w)] * ctx.pieces[w].d_delta_mu;
      if (c != 0.0) out += c * g[w];
    }
    return;
  }
  const double scale = pooled ? 1.0 / p.rho0 : 1.0;
  const std::size_t wo = *s.w;
  const double obs = p.nu[static_cast<Eigen::Index>(wo)] * ctx.pieces[wo].d_nu;
  if (obs != 0.0) out += scale * obs * g[wo];
  for (std::size_t w = 0; w < k; ++w) {
    const double nw = p.nu[static_cast<Eigen::Index>(w)];
    const double c = nw * nw * ctx.pieces[w].d_nu;
    if (c != 0.0) out -= scale * c * g[w];
  }
}

bool needs_all_levels(const ObservedSample& s, const Design& design, EstimatorKind kind) {
  return kind == EstimatorKind::bias_corrected || (s.e && design.spec().population == ProjectionPopulation::pooled);
}

Vector unit_phi_ctx(const ObservedSample& s, const UnitContext& ctx, const Vector& beta, const Design& design,
                    EstimatorKind kind) {
  const auto p = static_cast<Eigen::Index>(design.dim());
  Vector phi = Vector::Zero(p);
  const std::size_t k = design.levels();
  const bool pooled = design.spec().population == ProjectionPopulation::pooled;
  const bool all = needs_all_levels(s, design, kind);
  std::vector<Vector> g(k);
  std::vector<double> m(k, 0.0);
  Vector x;
  for (std::size_t w = 0; w < k; ++w) {
    if (!all && w != *s.w) continue;
    design.x(s.v, w, x);
    design.model_gradient(x, beta, g[w]);
    g[w] *= design.weight(x);
    m[w] = design.model(x, beta);
  }
  if (kind == EstimatorKind::bias_corrected) add_corrections(s, ctx, g, pooled, phi);
  if (!s.e) {
    const std::size_t wo = *s.w;
    phi += g[wo] * (ctx.pieces[wo].value - m[wo]);
  } else if (pooled) {
    for (std::size_t w = 0; w < k; ++w) {
      phi += ctx.point.nu[static_cast<Eigen::Index>(w)] * (ctx.pieces[w].value - m[w]) * g[w];
    }
  }
  return phi;
}

Vector unit_phi(const ObservedSample& s, const Vector& beta, const NuisanceSet& eta, const Design& design,
                IndicatorSource ind, EstimatorKind kind) {
  if (!unit_used(s, design, kind)) return Vector::Zero(static_cast<Eigen::Index>(design.dim()));
  return unit_phi_ctx(s, make_context(s, eta, design, ind), beta, design, kind);
}

struct AffineAcc {
  Vector c;
  Matrix s;
  std::size_t n = 0;

  AffineAcc operator+(const AffineAcc& o) const { return {c + o.c, s + o.s, n + o.n}; }
};

struct VecAcc {
  Vector v;
  std::size_t n = 0;

  VecAcc operator+(const VecAcc& o) const { return {v + o.v, n + o.n}; }
};

std::size_t count_used(const Dataset& d, const Design& design, EstimatorKind kind) {
  std::size_t n = 0;
  for (const auto& s : d.samples) n += unit_used(s, design, kind) ? 1 : 0;
  return n;
}

Vector mean_phi_kind(const Dataset& d, const Vector& beta, const NuisanceSet& eta, const Design& design,
                     IndicatorSource ind, EstimatorKind kind) {
  const auto p = static_cast<Eigen::Index>(design.dim());
  const VecAcc zero{Vector::Zero(p), 0};
  const VecAcc total = chunked_sum(d.size(), zero, [&](std::size_t b, std::size_t e) {
    VecAcc acc = zero;
    for (std::size_t i = b; i < e; ++i) {
      const auto& s = d.samples[i];
      if (!unit_used(s, design, kind)) continue;
      acc.v += unit_phi(s, beta, eta, design, ind, kind);
      ++acc.n;
    }
    return acc;
  });
  if (total.n == 0) throw DataError("no units contribute to the moment");
  return total.v / static_cast<double>(total.n);
}

// Nuisance-dependent parts of phi do not depend on beta; cached per used unit.
struct ContextCache {
  std::vector<std::size_t> units;
  std::vector<UnitContext> ctx;
};

ContextCache build_cache(const Dataset& d, const NuisanceSet& eta, const Design& design, IndicatorSource ind,
                         EstimatorKind kind) {
  ContextCache c;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (unit_used(d.samples[i], design, kind)) c.units.push_back(i);
  }
  if (c.units.empty()) throw DataError("no units contribute to the moment");
  c.ctx.resize(c.units.size());
  parallel_for(c.units.size(), [&](std::size_t u) { c.ctx[u] = make_context(d.samples[c.units[u]], eta, design, ind); });
  return c;
}

Vector mean_phi_cached(const Dataset& d, const Vector& beta, const Design& design, const ContextCache& c,
                       EstimatorKind kind) {
  const auto p = static_cast<Eigen::Index>(design.dim());
  const Vector total = chunked_sum(c.units.size(), Vector(Vector::Zero(p)), [&](std::size_t b, std::size_t e) {
    Vector acc = Vector::Zero(p);
    for (std::size_t u = b; u < e; ++u) acc += unit_phi_ctx(d.samples[c.units[u]], c.ctx[u], beta, design, kind);
    return acc;
  });
  return total / static_cast<double>(c.units.size());
}

Matrix cached_jacobian(const Dataset& d, const Vector& beta, const Design& design, const ContextCache& c,
                       EstimatorKind kind) {
  const auto p = beta.size();
  Matrix j(p, p);
  for (Eigen::Index col = 0; col < p; ++col) {
    const double h = 1e-6 * std::max(1.0, std::abs(beta[col]));
    Vector bp = beta, bm = beta;
    bp[col] += h;
    bm[col] -= h;
    j.col(col) = (mean_phi_cached(d, bp, design, c, kind) - mean_phi_cached(d, bm, design, c, kind)) / (2 * h);
  }
  return j;
}

Matrix numeric_jacobian(const Dataset& d, const Vector& beta, const NuisanceSet& eta, const Design& design,
                        IndicatorSource ind, EstimatorKind kind) {
  const auto p = beta.size();
  Matrix j(p, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(beta[c]));
    Vector bp = beta, bm = beta;
    bp[c] += h;
    bm[c] -= h;
    j.col(c) = (mean_phi_kind(d, bp, eta, design, ind, kind) - mean_phi_kind(d, bm, eta, design, ind, kind)) / (2 * h);
  }
  return j;
}

BetaEstimate solve(const Dataset& d, const NuisanceSet& eta, const ModelSpec& spec, IndicatorSource ind,
                   EstimatorKind kind) {
  if (kind == EstimatorKind::bias_corrected) require_both_populations(d);
  if (d.count_target() == 0) throw DataError("no target units to project over");
  const Design design(d, spec);
  BetaEstimate est;
  est.side = spec.side;
  est.delta = spec.delta;
  est.kind = kind;
  if (design.linear()) {
    const AffineMoment am = affine_moment(d, eta, design, kind, ind);
    const SolveResult sol = solve_square(am.s, am.c);
    est.beta = sol.x.col(0);
    est.ridge_applied = sol.ridged;
    est.n_used = am.n_used;
  } else {
    const ContextCache cache = build_cache(d, eta, design, ind, kind);
    Vector beta = Vector::Zero(static_cast<Eigen::Index>(design.dim()));
    Vector phi = mean_phi_cached(d, beta, design, cache, kind);
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
      const Matrix j = cached_jacobian(d, beta, design, cache, kind);
      const Vector grad = j.transpose() * phi;
      if (grad.norm() < 1e-10 || max_abs(phi) < 1e-13) {
        converged = true;
        break;
      }
      const SolveResult step = solve_square(j.transpose() * j, -grad);
      est.ridge_applied = est.ridge_applied || step.ridged;
      const double obj = phi.squaredNorm();
      double t = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls) {
        const Vector cand = beta + t * step.x.col(0);
        const Vector pc = mean_phi_cached(d, cand, design, cache, kind);
        if (pc.squaredNorm() < obj) {
          beta = cand;
          phi = pc;
          moved = true;
          break;
        }
        t *= 0.5;
      }
      if (!moved) break;
    }
    if (!converged) {
      const Matrix j = cached_jacobian(d, beta, design, cache, kind);
      converged = (j.transpose() * phi).norm() < 1e-10 || max_abs(phi) < 1e-13;
    }
    if (!converged) throw NumericalError("solver failed", max_abs(phi));
    est.beta = beta;
    est.n_used = count_used(d, design, kind);
  }
  if (!est.beta.allFinite()) throw NumericalError("non-finite projection coefficients");
  est.moment_residual = max_abs(mean_phi_kind(d, est.beta, eta, design, ind, kind));
  if (est.ridge_applied) est.warnings.push_back("rank-deficient projection: ridge 1e-10 applied");
  return est;
}

}  // namespace

AffineMoment affine_moment(const Dataset& d, const NuisanceSet& eta, const Design& design, EstimatorKind kind,
                           IndicatorSource ind) {
  if (!design.linear()) throw ConfigError("affine moment requires a linear projection model");
  const auto p = static_cast<Eigen::Index>(design.dim());
  const std::size_t k = design.levels();
  const bool pooled = design.spec().population == ProjectionPopulation::pooled;
  const AffineAcc zero{Vector::Zero(p), Matrix::Zero(p, p), 0};
  const AffineAcc total = chunked_sum(d.size(), zero, [&](std::size_t b, std::size_t e) {
    AffineAcc acc = zero;
    std::vector<Vector> bas(k), g(k);
    std::vector<double> h(k, 0.0);
    Vector x;
    for (std::size_t i = b; i < e; ++i) {
      const auto& s = d.samples[i];
      if (!unit_used(s, design, kind)) continue;
      ++acc.n;
      const UnitContext ctx = make_context(s, eta, design, ind);
      const bool all = needs_all_levels(s, design, kind);
      for (std::size_t w = 0; w < k; ++w) {
        if (!all && w != *s.w) continue;
        design.x(s.v, w, x);
        design.basis(x, bas[w]);
        h[w] = design.weight(x);
        g[w] = h[w] * bas[w];
      }
      if (kind == EstimatorKind::bias_corrected) add_corrections(s, ctx, g, pooled, acc.c);
      if (!s.e) {
        const std::size_t wo = *s.w;
        acc.c += g[wo] * ctx.pieces[wo].value;
        acc.s.selfadjointView<Eigen::Lower>().rankUpdate(bas[wo], h[wo]);
      } else if (pooled) {
        for (std::size_t w = 0; w < k; ++w) {
          const double nw = ctx.point.nu[static_cast<Eigen::Index>(w)];
          acc.c += nw * ctx.pieces[w].value * g[w];
          acc.s.selfadjointView<Eigen::Lower>().rankUpdate(bas[w], nw * h[w]);
        }
      }
    }
    return acc;
  });
  if (total.n == 0) throw DataError("no units contribute to the moment");
  AffineMoment out;
  const double n = static_cast<double>(total.n);
  out.c = total.c / n;
  Matrix s = total.s / n;
  s.triangularView<Eigen::StrictlyUpper>() = s.transpose().triangularView<Eigen::StrictlyUpper>();
  out.s = s;
  out.n_used = total.n;
  return out;
}

Vector influence_phi(const ObservedSample& sample, const Vector& beta, const NuisanceSet& eta, const Design& design,
                     IndicatorSource indicator) {
  return unit_phi(sample, beta, eta, design, indicator, EstimatorKind::bias_corrected);
}

Vector influence_phi(const ObservedSample& sample, const Vector& beta, const NuisanceSet& eta, const Dataset& dataset,
                     const ModelSpec& spec) {
  const Design design(dataset, spec);
  return influence_phi(sample, beta, eta, design);
}

Vector mean_phi(const Dataset& d, const Vector& beta, const NuisanceSet& eta, const Design& design,
                IndicatorSource indicator) {
  return mean_phi_kind(d, beta, eta, design, indicator, EstimatorKind::bias_corrected);
}

bool unit_contributes(const ObservedSample& sample, const Design& design, EstimatorKind kind) {
  return unit_used(sample, design, kind);
}

Vector unit_moment(const ObservedSample& sample, const Vector& beta, const NuisanceSet& eta, const Design& design,
                   EstimatorKind kind, IndicatorSource indicator) {
  return unit_phi(sample, beta, eta, design, indicator, kind);
}

Matrix moment_jacobian(const Dataset& d2, const Vector& beta, const NuisanceSet& eta, const ModelSpec& spec,
                       EstimatorKind kind, IndicatorSource indicator) {
  const Design design(d2, spec);
  if (design.linear()) return -affine_moment(d2, eta, design, kind, indicator).s;
  return numeric_jacobian(d2, beta, eta, design, indicator, kind);
}

BetaEstimate plugin_beta(const Dataset& d, const NuisanceSet& eta, const ModelSpec& spec, IndicatorSource indicator) {
  return solve(d, eta, spec, indicator, EstimatorKind::plugin);
}

BetaEstimate solve_bias_corrected(const Dataset& d2, const NuisanceSet& eta, const ModelSpec& spec,
                                  IndicatorSource indicator) {
  return solve(d2, eta, spec, indicator, EstimatorKind::bias_corrected);
}

}  // namespace ecobounds
