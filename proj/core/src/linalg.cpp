#include "ecobounds/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace ecobounds {

SolveResult solve_square(const Matrix& a, const Matrix& b) {
  SolveResult out;
  Eigen::FullPivLU<Matrix> lu(a);
  const double rcond = a.size() == 0 ? 1.0 : lu.rcond();
  if (lu.isInvertible() && rcond > 1e-13) {
    out.x = lu.solve(b);
    // One step of iterative refinement.
    Matrix r = b - a * out.x;
    out.x += lu.solve(r);
    return out;
  }
  out.ridged = true;
  Matrix reg = a;
  reg.diagonal().array() += kSingularRidge;
  Eigen::ColPivHouseholderQR<Matrix> qr(reg);
  out.x = qr.solve(b);
  return out;
}

bool is_psd(const Matrix& a, double tol) {
  if (a.size() == 0) return true;
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, a.cwiseAbs().maxCoeff())) return false;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  return ev.minCoeff() >= -tol * scale;
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace ecobounds
