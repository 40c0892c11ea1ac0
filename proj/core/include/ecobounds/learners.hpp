#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ecobounds/linalg.hpp"

namespace ecobounds {

// Intercept followed by per-coordinate powers 1..degree. Coordinates flagged
// binary only get the linear term.
class PolynomialFeatures {
 public:
  PolynomialFeatures() = default;
  PolynomialFeatures(std::size_t input_dim, int degree, std::vector<bool> binary);
  // Flags a column binary when every row takes values in {0,1}.
  static PolynomialFeatures detect(const Matrix& inputs, int degree);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t dim() const { return dim_; }
  void apply(const double* input, double* out) const;
  Vector apply(const Vector& input) const;
  Matrix apply_rows(const Matrix& inputs) const;

 private:
  std::size_t input_dim_ = 0;
  int degree_ = 1;
  std::vector<bool> binary_;
  std::size_t dim_ = 1;
};

class LinearLeastSquares {
 public:
  // Ridge penalty (not applied to column 0, the intercept) on the mean squared error.
  void fit(const Matrix& x, const Vector& y, double ridge);
  double predict(const double* x) const;
  const Vector& coef() const { return coef_; }

 private:
  Vector coef_;
};

struct NewtonReport {
  int iterations = 0;
  double gradient_max = 0.0;
  bool converged = false;
};

// Binary logistic regression on targets in [0,1] (soft labels allowed),
// maximised by damped Newton on the mean log-likelihood minus a ridge term.
class LogisticRegression {
 public:
  NewtonReport fit(const Matrix& x, const Vector& y, double ridge, int max_iter = 100, double tol = 1e-8);
  double predict(const double* x) const;
  const Vector& coef() const { return coef_; }
  void set_coef(Vector c) { coef_ = std::move(c); }

  static double objective(const Matrix& x, const Vector& y, double ridge, const Vector& beta);
  static Vector gradient(const Matrix& x, const Vector& y, double ridge, const Vector& beta);

 private:
  Vector coef_;
};

// Multinomial logistic regression with class 0 as reference. Targets are an
// n x K matrix of class probabilities (one-hot rows for hard labels).
class MultinomialLogistic {
 public:
  NewtonReport fit(const Matrix& x, const Matrix& targets, double ridge, int max_iter = 100, double tol = 1e-8);
  void predict(const double* x, double* probs) const;
  std::size_t classes() const { return classes_; }
  const Matrix& coef() const { return coef_; }

  static double objective(const Matrix& x, const Matrix& t, double ridge, const Matrix& beta);
  static Matrix gradient(const Matrix& x, const Matrix& t, double ridge, const Matrix& beta);

 private:
  std::size_t classes_ = 0;
  Matrix coef_;  // p x (K-1)
};

// Nadaraya-Watson smoother with a Gaussian product kernel.
class KernelSmoother {
 public:
  // bandwidth_scale multiplies each coordinate's standard deviation; the
  // default is 1.06 n^(-1/5).
  void fit(const Matrix& x, const Matrix& targets, std::optional<double> bandwidth_scale);
  void predict(const double* x, double* out) const;
  std::size_t outputs() const { return static_cast<std::size_t>(targets_.cols()); }
  const Vector& bandwidths() const { return bandwidth_; }

 private:
  Matrix x_;
  Matrix targets_;
  Vector bandwidth_;
  Vector fallback_;
};

double sigmoid(double z);

}  // namespace ecobounds
