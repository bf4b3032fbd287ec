#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace xover {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Rejected input: bad dimensions, labels out of range, malformed
// configuration, parameter values outside their admissible domain.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Arithmetic failure at runtime: overflow, loss of positive
// definiteness, non-convergence where convergence is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A matrix that must be positive definite is singular or too close to
// it.  Carries the offending eigenvalue and the eigenvectors spanning
// the (near-)null space so callers can report which directions of the
// parameter space the design fails to identify.
class SingularMatrixError : public NumericError {
 public:
  SingularMatrixError(const std::string& what, double smallest_eigenvalue,
                      Matrix deficient_directions)
      : NumericError(what),
        smallest_eigenvalue_(smallest_eigenvalue),
        deficient_directions_(std::move(deficient_directions)) {}

  double smallest_eigenvalue() const noexcept { return smallest_eigenvalue_; }
  const Matrix& deficient_directions() const noexcept {
    return deficient_directions_;
  }

 private:
  double smallest_eigenvalue_;
  Matrix deficient_directions_;
};

// Optimality criterion.  DTheta targets the full parameter vector,
// DTau the treatment-effect contrasts only.
enum class Criterion { DTheta, DTau };

inline std::string to_string(Criterion criterion) {
  return criterion == Criterion::DTheta ? "theta" : "tau";
}

inline Criterion criterion_from_string(const std::string& name) {
  if (name == "theta") return Criterion::DTheta;
  if (name == "tau") return Criterion::DTau;
  throw ValidationError("unknown criterion '" + name +
                        "' (expected 'theta' or 'tau')");
}

// A matrix whose condition number exceeds this is treated as singular.
inline constexpr double kConditionLimit = 1e12;

}  // namespace xover
