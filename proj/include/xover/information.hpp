#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "xover/common.hpp"
#include "xover/design.hpp"
#include "xover/glm.hpp"
#include "xover/linalg.hpp"
#include "xover/sequence.hpp"
#include "xover/working_correlation.hpp"

namespace xover {

// Weighted per-sequence regressors.  With G = diag(d mu / d eta),
// D = diag(var(mu)) and R the upper factor of the inverse working
// correlation, the transformed matrix is
//
//   X* = R D^{-1/2} G X,
//
// and a sequence adds proportion * X*' X* to the information matrix.
struct SequenceContribution {
  Matrix x_star;
  Matrix gram;
};

inline SequenceContribution sequence_contribution(
    const TreatmentSequence& sequence, const ModelSpec& spec,
    const CorrelationFactor& factor) {
  const Matrix x = design_matrix(sequence);
  const LinkEvaluation link = evaluate_link(x, spec);
  const Vector scale = link.g_diag.cwiseQuotient(link.d_diag.cwiseSqrt());
  SequenceContribution out;
  out.x_star = factor.r * scale.asDiagonal() * x;
  out.gram = out.x_star.transpose() * out.x_star;
  return out;
}

inline SequenceContribution sequence_contribution(
    const TreatmentSequence& sequence, const ModelSpec& spec) {
  return sequence_contribution(
      sequence, spec, factor_inverse(spec.correlation, spec.period_count));
}

// Model-based information matrix of a design, normalized to one
// subject: M = sum_i p_i X*_i' X*_i.
inline Matrix information_matrix(const CrossoverDesign& design,
                                 const ModelSpec& spec) {
  spec.validate();
  if (design.treatment_count() != spec.treatment_count ||
      design.period_count() != spec.period_count) {
    throw ValidationError("design layout does not match the model layout");
  }
  const CorrelationFactor factor =
      factor_inverse(spec.correlation, spec.period_count);
  const int m = spec.parameter_count();
  Matrix info = Matrix::Zero(m, m);
  for (int i = 0; i < design.size(); ++i) {
    const double w = design.proportion(i);
    if (w == 0.0) continue;
    info += w * sequence_contribution(design.sequence(i), spec, factor).gram;
  }
  return info;
}

// Asymptotic variance of the full parameter estimate: M^-1.
inline Matrix variance_theta(const Matrix& information) {
  return detail::spd_inverse(information, "information matrix");
}

inline Matrix variance_theta(const CrossoverDesign& design,
                             const ModelSpec& spec) {
  return variance_theta(information_matrix(design, spec));
}

// Asymptotic variance of the treatment-effect estimate: H M^-1 H'.
inline Matrix variance_tau(const Matrix& information, const Matrix& contrast) {
  if (contrast.cols() != information.cols()) {
    throw ValidationError("contrast matrix does not match the information matrix");
  }
  const Matrix inv = detail::spd_inverse(information, "information matrix");
  return contrast * inv * contrast.transpose();
}

inline Matrix variance_tau(const CrossoverDesign& design,
                           const ModelSpec& spec) {
  return variance_tau(information_matrix(design, spec),
                      contrast_matrix(spec.treatment_count, spec.period_count));
}

// Relative D-efficiency of design a against design b: the ratio of
// subjects b needs to match a, above 1 when a is the better design.
// Computed as exp((objective(b) - objective(a)) / bound) with the
// criterion bound m or t - 1 as the homogeneity degree.
inline double relative_d_efficiency(const CrossoverDesign& a,
                                    const CrossoverDesign& b,
                                    const ModelSpec& spec,
                                    Criterion criterion) {
  const Matrix ma = information_matrix(a, spec);
  const Matrix mb = information_matrix(b, spec);
  double phi_a = 0.0;
  double phi_b = 0.0;
  double bound = 0.0;
  if (criterion == Criterion::DTheta) {
    phi_a = -detail::spd_log_det(ma, "information matrix of design a");
    phi_b = -detail::spd_log_det(mb, "information matrix of design b");
    bound = static_cast<double>(spec.parameter_count());
  } else {
    const Matrix h =
        contrast_matrix(spec.treatment_count, spec.period_count);
    phi_a = detail::spd_log_det(variance_tau(ma, h),
                                "treatment variance of design a");
    phi_b = detail::spd_log_det(variance_tau(mb, h),
                                "treatment variance of design b");
    bound = static_cast<double>(spec.treatment_count - 1);
  }
  return std::exp((phi_b - phi_a) / bound);
}

}  // namespace xover
