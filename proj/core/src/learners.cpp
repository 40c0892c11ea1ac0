#include "ecobounds/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecobounds/error.hpp"

namespace ecobounds {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double log1pexp(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace

PolynomialFeatures::PolynomialFeatures(std::size_t input_dim, int degree, std::vector<bool> binary)
    : input_dim_(input_dim), degree_(degree), binary_(std::move(binary)) {
  if (degree_ < 1) throw ConfigError("polynomial degree must be >= 1");
  if (binary_.size() != input_dim_) binary_.assign(input_dim_, false);
  dim_ = 1;
  for (std::size_t j = 0; j < input_dim_; ++j) dim_ += binary_[j] ? 1 : static_cast<std::size_t>(degree_);
}

PolynomialFeatures PolynomialFeatures::detect(const Matrix& inputs, int degree) {
  std::vector<bool> binary(static_cast<std::size_t>(inputs.cols()), true);
  for (Eigen::Index j = 0; j < inputs.cols(); ++j) {
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
      const double x = inputs(i, j);
      if (x != 0.0 && x != 1.0) {
        binary[static_cast<std::size_t>(j)] = false;
        break;
      }
    }
  }
  return PolynomialFeatures(static_cast<std::size_t>(inputs.cols()), degree, binary);
}

void PolynomialFeatures::apply(const double* input, double* out) const {
  std::size_t k = 0;
  out[k++] = 1.0;
  for (std::size_t j = 0; j < input_dim_; ++j) {
    double p = input[j];
    out[k++] = p;
    if (binary_[j]) continue;
    for (int d = 2; d <= degree_; ++d) {
      p *= input[j];
      out[k++] = p;
    }
  }
}

Vector PolynomialFeatures::apply(const Vector& input) const {
  Vector out(static_cast<Eigen::Index>(dim_));
  apply(input.data(), out.data());
  return out;
}

Matrix PolynomialFeatures::apply_rows(const Matrix& inputs) const {
  Matrix out(inputs.rows(), static_cast<Eigen::Index>(dim_));
  Vector row(inputs.cols());
  Vector f(static_cast<Eigen::Index>(dim_));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    row = inputs.row(i).transpose();
    apply(row.data(), f.data());
    out.row(i) = f.transpose();
  }
  return out;
}

void LinearLeastSquares::fit(const Matrix& x, const Vector& y, double ridge) {
  const double n = static_cast<double>(x.rows());
  if (x.rows() == 0) throw DataError("empty regression sample");
  Matrix gram = x.transpose() * x / n;
  for (Eigen::Index j = 1; j < gram.rows(); ++j) gram(j, j) += ridge;
  const Vector rhs = x.transpose() * y / n;
  coef_ = solve_square(gram, rhs).x.col(0);
}

double LinearLeastSquares::predict(const double* x) const {
  double s = 0.0;
  for (Eigen::Index j = 0; j < coef_.size(); ++j) s += coef_[j] * x[j];
  return s;
}

double LogisticRegression::objective(const Matrix& x, const Vector& y, double ridge, const Vector& beta) {
  const Vector z = x * beta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) s += y[i] * z[i] - log1pexp(z[i]);
  return s / static_cast<double>(x.rows()) - 0.5 * ridge * beta.squaredNorm();
}

Vector LogisticRegression::gradient(const Matrix& x, const Vector& y, double ridge, const Vector& beta) {
  const Vector z = x * beta;
  Vector r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r[i] = y[i] - sigmoid(z[i]);
  return x.transpose() * r / static_cast<double>(x.rows()) - ridge * beta;
}

NewtonReport LogisticRegression::fit(const Matrix& x, const Vector& y, double ridge, int max_iter, double tol) {
  if (x.rows() == 0) throw DataError("empty classification sample");
  const double n = static_cast<double>(x.rows());
  Vector beta = Vector::Zero(x.cols());
  double obj = objective(x, y, ridge, beta);
  NewtonReport rep;
  for (int it = 0; it < max_iter; ++it) {
    const Vector z = x * beta;
    Vector w(z.size());
    Vector r(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      const double p = sigmoid(z[i]);
      w[i] = p * (1.0 - p);
      r[i] = y[i] - p;
    }
    const Vector g = x.transpose() * r / n - ridge * beta;
    rep.gradient_max = max_abs(g);
    rep.iterations = it;
    if (rep.gradient_max < tol) {
      rep.converged = true;
      break;
    }
    Matrix h = x.transpose() * (x.array().colwise() * w.array()).matrix() / n;
    h.diagonal().array() += ridge;
    const Vector step = solve_square(h, g).x.col(0);
    double t = 1.0;
    for (int ls = 0; ls < 40; ++ls) {
      const Vector cand = beta + t * step;
      const double o = objective(x, y, ridge, cand);
      if (o >= obj - 1e-15 * std::abs(obj)) {
        beta = cand;
        obj = o;
        break;
      }
      t *= 0.5;
    }
    rep.iterations = it + 1;
  }
  if (!rep.converged) rep.gradient_max = max_abs(gradient(x, y, ridge, beta));
  rep.converged = rep.converged || rep.gradient_max < tol;
  coef_ = beta;
  return rep;
}

double LogisticRegression::predict(const double* x) const {
  double z = 0.0;
  for (Eigen::Index j = 0; j < coef_.size(); ++j) z += coef_[j] * x[j];
  return sigmoid(z);
}

namespace {

// Row-wise softmax of [0, X B].
Matrix softmax_probs(const Matrix& x, const Matrix& beta) {
  const Matrix z = x * beta;
  Matrix p(x.rows(), beta.cols() + 1);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) m = std::max(m, z(i, k));
    double s = std::exp(-m);
    p(i, 0) = s;
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      const double e = std::exp(z(i, k) - m);
      p(i, k + 1) = e;
      s += e;
    }
    p.row(i) /= s;
  }
  return p;
}

}  // namespace

double MultinomialLogistic::objective(const Matrix& x, const Matrix& t, double ridge, const Matrix& beta) {
  const Matrix z = x * beta;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) m = std::max(m, z(i, k));
    double lse = std::exp(-m);
    double lin = 0.0;
    for (Eigen::Index k = 0; k < z.cols(); ++k) {
      lse += std::exp(z(i, k) - m);
      lin += t(i, k + 1) * z(i, k);
    }
    s += lin - (m + std::log(lse)) * t.row(i).sum();
  }
  return s / static_cast<double>(x.rows()) - 0.5 * ridge * beta.squaredNorm();
}

Matrix MultinomialLogistic::gradient(const Matrix& x, const Matrix& t, double ridge, const Matrix& beta) {
  const Matrix p = softmax_probs(x, beta);
  Matrix r(x.rows(), beta.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mass = t.row(i).sum();
    for (Eigen::Index k = 0; k < beta.cols(); ++k) r(i, k) = t(i, k + 1) - mass * p(i, k + 1);
  }
  return x.transpose() * r / static_cast<double>(x.rows()) - ridge * beta;
}

NewtonReport MultinomialLogistic::fit(const Matrix& x, const Matrix& targets, double ridge, int max_iter, double tol) {
  if (x.rows() == 0) throw DataError("empty classification sample");
  if (targets.cols() < 1) throw DataError("multinomial fit needs at least one class");
  classes_ = static_cast<std::size_t>(targets.cols());
  const Eigen::Index p = x.cols();
  const Eigen::Index km1 = targets.cols() - 1;
  const double n = static_cast<double>(x.rows());
  Matrix beta = Matrix::Zero(p, km1);
  NewtonReport rep;
  if (km1 == 0) {
    coef_ = beta;
    rep.converged = true;
    return rep;
  }
  double obj = objective(x, targets, ridge, beta);
  for (int it = 0; it < max_iter; ++it) {
    const Matrix g = gradient(x, targets, ridge, beta);
    rep.gradient_max = g.cwiseAbs().maxCoeff();
    rep.iterations = it;
    if (rep.gradient_max < tol) {
      rep.converged = true;
      break;
    }
    const Matrix pr = softmax_probs(x, beta);
    Matrix h(p * km1, p * km1);
    for (Eigen::Index k = 0; k < km1; ++k) {
      for (Eigen::Index l = k; l < km1; ++l) {
        Vector w(x.rows());
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          const double mass = targets.row(i).sum();
          w[i] = mass * pr(i, k + 1) * ((k == l ? 1.0 : 0.0) - pr(i, l + 1));
        }
        Matrix block = x.transpose() * (x.array().colwise() * w.array()).matrix() / n;
        if (k == l) block.diagonal().array() += ridge;
        h.block(k * p, l * p, p, p) = block;
        if (l != k) h.block(l * p, k * p, p, p) = block.transpose();
      }
    }
    const Vector gv = Eigen::Map<const Vector>(g.data(), g.size());
    const Vector sv = solve_square(h, gv).x.col(0);
    const Matrix step = Eigen::Map<const Matrix>(sv.data(), p, km1);
    double t = 1.0;
    for (int ls = 0; ls < 40; ++ls) {
      const Matrix cand = beta + t * step;
      const double o = objective(x, targets, ridge, cand);
      if (o >= obj - 1e-15 * std::abs(obj)) {
        beta = cand;
        obj = o;
        break;
      }
      t *= 0.5;
    }
    rep.iterations = it + 1;
  }
  if (!rep.converged) {
    rep.gradient_max = gradient(x, targets, ridge, beta).cwiseAbs().maxCoeff();
    rep.converged = rep.gradient_max < tol;
  }
  coef_ = beta;
  return rep;
}

void MultinomialLogistic::predict(const double* x, double* probs) const {
  const Eigen::Index p = coef_.rows();
  double m = 0.0;
  std::vector<double> z(static_cast<std::size_t>(coef_.cols()));
  for (Eigen::Index k = 0; k < coef_.cols(); ++k) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) s += coef_(j, k) * x[j];
    z[static_cast<std::size_t>(k)] = s;
    m = std::max(m, s);
  }
  double total = std::exp(-m);
  probs[0] = total;
  for (std::size_t k = 0; k < z.size(); ++k) {
    probs[k + 1] = std::exp(z[k] - m);
    total += probs[k + 1];
  }
  for (std::size_t k = 0; k < classes_; ++k) probs[k] /= total;
}

void KernelSmoother::fit(const Matrix& x, const Matrix& targets, std::optional<double> bandwidth_scale) {
  if (x.rows() == 0) throw DataError("empty smoothing sample");
  x_ = x;
  targets_ = targets;
  const double n = static_cast<double>(x.rows());
  const double scale = bandwidth_scale ? *bandwidth_scale : 1.06 * std::pow(n, -0.2);
  if (!(scale > 0.0)) throw ConfigError("kernel bandwidth must be > 0");
  bandwidth_.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mean = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mean).square().sum() / std::max(1.0, n - 1.0));
    bandwidth_[j] = sd > 0.0 ? scale * sd : std::numeric_limits<double>::infinity();
  }
  fallback_ = targets.colwise().mean().transpose();
}

void KernelSmoother::predict(const double* x, double* out) const {
  const Eigen::Index n = x_.rows();
  const Eigen::Index d = x_.cols();
  const Eigen::Index k = targets_.cols();
  std::vector<double> logw(static_cast<std::size_t>(n));
  double m = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!std::isfinite(bandwidth_[j])) continue;
      const double u = (x[j] - x_(i, j)) / bandwidth_[j];
      s += u * u;
    }
    logw[static_cast<std::size_t>(i)] = -0.5 * s;
    m = std::max(m, -0.5 * s);
  }
  for (Eigen::Index c = 0; c < k; ++c) out[c] = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = std::exp(logw[static_cast<std::size_t>(i)] - m);
    total += w;
    for (Eigen::Index c = 0; c < k; ++c) out[c] += w * targets_(i, c);
  }
  if (!(total > 0.0)) {
    for (Eigen::Index c = 0; c < k; ++c) out[c] = fallback_[c];
    return;
  }
  for (Eigen::Index c = 0; c < k; ++c) out[c] /= total;
}

}  // namespace ecobounds
