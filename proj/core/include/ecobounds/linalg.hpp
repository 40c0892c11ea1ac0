#pragma once

#include <Eigen/Dense>

namespace ecobounds {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kSingularRidge = 1e-10;

struct SolveResult {
  Matrix x;
  bool ridged = false;
};

// Solves A x = B for a square A. If A is numerically singular (reciprocal
// condition below 1e-13), kSingularRidge * I is added and ridged is set.
SolveResult solve_square(const Matrix& a, const Matrix& b);

// True if the symmetric matrix is positive semidefinite within tol
// (relative to its largest absolute eigenvalue).
bool is_psd(const Matrix& a, double tol = 1e-10);

double max_abs(const Vector& v);

}  // namespace ecobounds
