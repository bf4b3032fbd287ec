#pragma once

#include <string>

#include "xover/common.hpp"

namespace xover::detail {

// Spectral decomposition of a symmetric matrix that is required to be
// positive definite.  Throws SingularMatrixError when the smallest
// eigenvalue is nonpositive or the condition number exceeds
// kConditionLimit; the error carries the smallest eigenvalue and the
// eigenvectors of every eigenvalue that trips the check.
inline Eigen::SelfAdjointEigenSolver<Matrix> spd_eigens(
    const Matrix& m, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericError("eigendecomposition of " + what + " failed");
  }
  const Vector& ev = solver.eigenvalues();  // ascending
  const auto n = ev.size();
  const double smallest = ev(0);
  const double largest = ev(n - 1);

  auto deficient = [&](double lambda) {
    return lambda <= 0.0 || largest > lambda * kConditionLimit;
  };
  if (deficient(smallest)) {
    Eigen::Index count = 0;
    while (count < n && deficient(ev(count))) ++count;
    throw SingularMatrixError(
        what + " is singular or ill-conditioned (smallest eigenvalue " +
            std::to_string(smallest) + ")",
        smallest, solver.eigenvectors().leftCols(count));
  }
  return solver;
}

inline Matrix spd_inverse(const Matrix& m, const std::string& what) {
  const auto solver = spd_eigens(m, what);
  return solver.eigenvectors() *
         solver.eigenvalues().cwiseInverse().asDiagonal() *
         solver.eigenvectors().transpose();
}

inline double spd_log_det(const Matrix& m, const std::string& what) {
  const auto solver = spd_eigens(m, what);
  return solver.eigenvalues().array().log().sum();
}

// Inverse and log-determinant from a single decomposition.
struct SpdSummary {
  Matrix inverse;
  double log_det;
};

inline SpdSummary spd_summary(const Matrix& m, const std::string& what) {
  const auto solver = spd_eigens(m, what);
  return SpdSummary{solver.eigenvectors() *
                        solver.eigenvalues().cwiseInverse().asDiagonal() *
                        solver.eigenvectors().transpose(),
                    solver.eigenvalues().array().log().sum()};
}

}  // namespace xover::detail
