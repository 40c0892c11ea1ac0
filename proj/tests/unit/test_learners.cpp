#include <gtest/gtest.h>

#include <cmath>

#include "ecobounds/learners.hpp"
#include "ecobounds/rng.hpp"

using namespace ecobounds;

namespace {

Matrix design(std::size_t n, std::size_t p, Rng& r) {
  Matrix x(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 1; j < p; ++j) x(i, j) = r.normal();
  }
  return x;
}

}  // namespace

TEST(PolynomialFeatures, BinaryColumnsOnlyLinear) {
  PolynomialFeatures f(2, 3, {false, true});
  EXPECT_EQ(f.dim(), 1u + 3u + 1u);
  const Vector out = f.apply(Vector{{2.0, 1.0}});
  EXPECT_EQ(out[0], 1.0);
  EXPECT_DOUBLE_EQ(out[1], 2.0);
  EXPECT_DOUBLE_EQ(out[2], 4.0);
  EXPECT_DOUBLE_EQ(out[3], 8.0);
  EXPECT_DOUBLE_EQ(out[4], 1.0);
  Matrix in(3, 2);
  in << 0.5, 0, 1.5, 1, -1, 0;
  EXPECT_EQ(PolynomialFeatures::detect(in, 2).dim(), 4u);
}

TEST(LinearLeastSquares, NoiselessRecovery) {
  Rng r(1);
  const Matrix x = design(200, 4, r);
  const Vector beta{{0.5, -1.0, 2.0, 0.25}};
  const Vector y = x * beta;
  LinearLeastSquares m;
  m.fit(x, y, 0.0);
  EXPECT_LT((m.coef() - beta).cwiseAbs().maxCoeff(), 1e-10);
  double worst = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Vector row = x.row(i).transpose();
    worst = std::max(worst, std::abs(m.predict(row.data()) - y[i]));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(LogisticRegression, GradientMatchesFiniteDifferences) {
  Rng r(2);
  const Matrix x = design(150, 4, r);
  Vector y(150);
  for (int i = 0; i < 150; ++i) y[i] = r.bernoulli(0.4) ? 1.0 : 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector beta(4);
    for (int j = 0; j < 4; ++j) beta[j] = r.normal();
    const Vector g = LogisticRegression::gradient(x, y, 0.1, beta);
    for (int j = 0; j < 4; ++j) {
      const double h = 1e-5;
      Vector bp = beta, bm = beta;
      bp[j] += h;
      bm[j] -= h;
      const double fd = (LogisticRegression::objective(x, y, 0.1, bp) - LogisticRegression::objective(x, y, 0.1, bm)) / (2 * h);
      EXPECT_LT(std::abs(fd - g[j]), 1e-5 * std::max(1.0, std::abs(g[j]))) << trial << "," << j;
    }
  }
}

TEST(LogisticRegression, RecoversCoefficientsAndConverges) {
  Rng r(3);
  const int n = 20000;
  const Matrix x = design(n, 3, r);
  const Vector beta{{-0.3, 1.0, -0.7}};
  Vector y(n);
  for (int i = 0; i < n; ++i) y[i] = r.bernoulli(sigmoid(x.row(i).dot(beta))) ? 1.0 : 0.0;
  LogisticRegression m;
  const NewtonReport rep = m.fit(x, y, 0.0);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT((m.coef() - beta).cwiseAbs().maxCoeff(), 0.08);
}

TEST(LogisticRegression, SoftLabelsInsideModelClass) {
  Rng r(4);
  const Matrix x = design(300, 3, r);
  const Vector beta{{0.2, -0.5, 0.9}};
  Vector y(300);
  for (int i = 0; i < 300; ++i) y[i] = sigmoid(x.row(i).dot(beta));
  LogisticRegression m;
  m.fit(x, y, 0.0, 200, 1e-12);
  double worst = 0;
  for (int i = 0; i < 300; ++i) {
    const Vector row = x.row(i).transpose();
    worst = std::max(worst, std::abs(m.predict(row.data()) - y[i]));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(MultinomialLogistic, GradientMatchesFiniteDifferences) {
  Rng r(5);
  const Matrix x = design(120, 3, r);
  Matrix t = Matrix::Zero(120, 4);
  for (int i = 0; i < 120; ++i) t(i, static_cast<Eigen::Index>(r.index(4))) = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix beta(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) beta(a, b) = r.normal();
    const Matrix g = MultinomialLogistic::gradient(x, t, 0.05, beta);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        const double h = 1e-5;
        Matrix bp = beta, bm = beta;
        bp(a, b) += h;
        bm(a, b) -= h;
        const double fd =
            (MultinomialLogistic::objective(x, t, 0.05, bp) - MultinomialLogistic::objective(x, t, 0.05, bm)) / (2 * h);
        EXPECT_LT(std::abs(fd - g(a, b)), 1e-5 * std::max(1.0, std::abs(g(a, b))));
      }
    }
  }
}

TEST(MultinomialLogistic, ProbabilitiesSumToOne) {
  Rng r(6);
  const Matrix x = design(500, 3, r);
  Matrix t = Matrix::Zero(500, 3);
  for (int i = 0; i < 500; ++i) t(i, x(i, 1) > 0 ? 2 : static_cast<Eigen::Index>(r.index(2))) = 1.0;
  MultinomialLogistic m;
  EXPECT_TRUE(m.fit(x, t, 1e-6).converged);
  EXPECT_EQ(m.classes(), 3u);
  double p[3];
  const Vector row = x.row(0).transpose();
  m.predict(row.data(), p);
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
}

TEST(KernelSmoother, ConstantTargetIsReproduced) {
  Rng r(7);
  Matrix x(100, 2), t = Matrix::Constant(100, 1, 3.5);
  for (int i = 0; i < 100; ++i) x.row(i) << r.normal(), r.normal();
  KernelSmoother k;
  k.fit(x, t, std::nullopt);
  EXPECT_TRUE((k.bandwidths().array() > 0).all());
  double out = 0;
  const double q[2] = {0.3, -0.2};
  k.predict(q, &out);
  EXPECT_NEAR(out, 3.5, 1e-12);
  const double far[2] = {1e3, 1e3};
  k.predict(far, &out);
  EXPECT_NEAR(out, 3.5, 1e-12);
}

TEST(KernelSmoother, TracksSmoothFunction) {
  Rng r(8);
  const int n = 4000;
  Matrix x(n, 1), t(n, 1);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = r.uniform(-2, 2);
    t(i, 0) = std::sin(x(i, 0));
  }
  KernelSmoother k;
  k.fit(x, t, std::nullopt);
  for (double q : {-1.0, 0.0, 0.7}) {
    double out = 0;
    k.predict(&q, &out);
    EXPECT_NEAR(out, std::sin(q), 0.03);
  }
}
