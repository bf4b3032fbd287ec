#pragma once

#include <cmath>
#include <string>

#include "xover/common.hpp"
#include "xover/linalg.hpp"

namespace xover {

enum class CorrelationStructure { AR1, CompoundSymmetry, Independence };

inline std::string to_string(CorrelationStructure structure) {
  switch (structure) {
    case CorrelationStructure::AR1:
      return "ar1";
    case CorrelationStructure::CompoundSymmetry:
      return "compound_symmetry";
    case CorrelationStructure::Independence:
      return "independence";
  }
  throw ValidationError("invalid correlation structure");
}

inline CorrelationStructure correlation_structure_from_string(
    const std::string& name) {
  if (name == "ar1") return CorrelationStructure::AR1;
  if (name == "compound_symmetry") return CorrelationStructure::CompoundSymmetry;
  if (name == "independence") return CorrelationStructure::Independence;
  throw ValidationError("unknown correlation structure '" + name +
                        "' (expected 'ar1', 'compound_symmetry' or "
                        "'independence')");
}

// Working correlation choice for the repeated measurements within a
// subject.  `alpha` is ignored under independence.
struct CorrelationSpec {
  CorrelationStructure structure = CorrelationStructure::Independence;
  double alpha = 0.0;
};

// The p x p working correlation matrix.  AR(1) requires |alpha| < 1;
// compound symmetry requires -1/(p-1) < alpha < 1 so the matrix stays
// positive definite.
inline Matrix build_correlation(const CorrelationSpec& spec, int period_count) {
  if (period_count < 1) {
    throw ValidationError("correlation matrix needs at least one period");
  }
  const int p = period_count;
  Matrix c = Matrix::Identity(p, p);
  switch (spec.structure) {
    case CorrelationStructure::Independence:
      break;
    case CorrelationStructure::AR1: {
      if (!(std::abs(spec.alpha) < 1.0)) {
        throw ValidationError("ar1 requires |alpha| < 1");
      }
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
          c(i, j) = std::pow(spec.alpha, std::abs(i - j));
        }
      }
      break;
    }
    case CorrelationStructure::CompoundSymmetry: {
      const double lower = p > 1 ? -1.0 / (p - 1) : -1.0;
      if (!(spec.alpha > lower && spec.alpha < 1.0)) {
        throw ValidationError(
            "compound_symmetry requires -1/(p-1) < alpha < 1");
      }
      for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
          if (i != j) c(i, j) = spec.alpha;
        }
      }
      break;
    }
  }
  return c;
}

// A positive definite correlation matrix together with an upper
// triangular factor R satisfying R' R = C^-1.
struct CorrelationFactor {
  Matrix c;
  Matrix r;
};

// Inverts C and factors the inverse.  The factor is validated by
// reconstruction: ||R' R C - I||_max must stay below 1e-10.
inline CorrelationFactor factor_inverse(const Matrix& c) {
  if (c.rows() != c.cols()) {
    throw ValidationError("correlation matrix must be square");
  }
  const auto n = c.rows();
  const Matrix c_inv = detail::spd_inverse(c, "working correlation matrix");
  Eigen::LLT<Matrix> llt(c_inv);
  if (llt.info() != Eigen::Success) {
    throw NumericError("factorization of inverse correlation failed");
  }
  // LLT gives C^-1 = L L'; R = L' is the upper triangular factor with
  // R' R = C^-1.
  Matrix r = llt.matrixL().transpose();
  const double residual =
      (r.transpose() * r * c - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
  if (!(residual < 1e-10)) {
    throw NumericError("inverse correlation factor residual " +
                       std::to_string(residual) + " exceeds 1e-10");
  }
  return CorrelationFactor{c, std::move(r)};
}

inline CorrelationFactor factor_inverse(const CorrelationSpec& spec,
                                        int period_count) {
  return factor_inverse(build_correlation(spec, period_count));
}

}  // namespace xover
