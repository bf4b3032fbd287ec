#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xover/common.hpp"
#include "xover/design.hpp"
#include "xover/glm.hpp"
#include "xover/information.hpp"
#include "xover/linalg.hpp"

namespace xover {

// Value every supported sequence's sensitivity attains at the optimum:
// the parameter count m for the full-parameter criterion, t - 1 for the
// treatment-contrast criterion.
inline double criterion_bound(Criterion criterion, const ModelSpec& spec) {
  return criterion == Criterion::DTheta
             ? static_cast<double>(spec.parameter_count())
             : static_cast<double>(spec.treatment_count - 1);
}

// A fixed candidate sequence set under a fixed model, with the
// per-sequence contributions precomputed.  Everything that evaluates
// designs repeatedly (optimizers, the grid oracle, sweeps) runs through
// this so the link and correlation work happens once.
class DesignProblem {
 public:
  DesignProblem(std::vector<TreatmentSequence> sequences, ModelSpec spec)
      : spec_(std::move(spec)), sequences_(std::move(sequences)) {
    spec_.validate();
    if (sequences_.empty()) {
      throw ValidationError("candidate set must contain at least one sequence");
    }
    for (const auto& s : sequences_) {
      if (s.treatment_count() != spec_.treatment_count ||
          s.period_count() != spec_.period_count) {
        throw ValidationError("sequence " + s.str() +
                              " does not match the model layout");
      }
    }
    for (std::size_t i = 0; i < sequences_.size(); ++i) {
      for (std::size_t j = i + 1; j < sequences_.size(); ++j) {
        if (sequences_[i] == sequences_[j]) {
          throw ValidationError("candidate sequences must be distinct (" +
                                sequences_[i].str() + " repeats)");
        }
      }
    }
    const CorrelationFactor factor =
        factor_inverse(spec_.correlation, spec_.period_count);
    contributions_.reserve(sequences_.size());
    for (const auto& s : sequences_) {
      contributions_.push_back(sequence_contribution(s, spec_, factor));
    }
    contrast_ = contrast_matrix(spec_.treatment_count, spec_.period_count);
  }

  int sequence_count() const noexcept {
    return static_cast<int>(sequences_.size());
  }
  int parameter_count() const noexcept { return spec_.parameter_count(); }
  double bound(Criterion criterion) const {
    return criterion_bound(criterion, spec_);
  }

  const ModelSpec& spec() const noexcept { return spec_; }
  const std::vector<TreatmentSequence>& sequences() const noexcept {
    return sequences_;
  }
  const std::vector<SequenceContribution>& contributions() const noexcept {
    return contributions_;
  }
  const Matrix& contrast() const noexcept { return contrast_; }

  // Weights are trusted here: callers own simplex feasibility.
  Matrix information(std::span<const double> weights) const {
    check_size(weights);
    const int m = parameter_count();
    Matrix info = Matrix::Zero(m, m);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (weights[i] == 0.0) continue;
      info += weights[i] * contributions_[i].gram;
    }
    return info;
  }

  double objective(std::span<const double> weights, Criterion criterion) const {
    const Matrix info = information(weights);
    if (criterion == Criterion::DTheta) {
      return -detail::spd_log_det(info, "information matrix");
    }
    const Matrix inv = detail::spd_inverse(info, "information matrix");
    return detail::spd_log_det(contrast_ * inv * contrast_.transpose(),
                               "treatment variance matrix");
  }

  Vector sensitivities(std::span<const double> weights,
                       Criterion criterion) const {
    return evaluate(weights, criterion).sensitivities;
  }

  struct Evaluation {
    double objective;
    Vector sensitivities;
  };

  // Objective and all per-sequence sensitivities from one inversion.
  // The full-parameter sensitivity is trace(X*_i M^-1 X*_i'); the
  // contrast sensitivity replaces M^-1 by
  // M^-1 H' (H M^-1 H')^-1 H M^-1.  Both are Frobenius products of the
  // sequence gram with a fixed kernel matrix.
  Evaluation evaluate(std::span<const double> weights,
                      Criterion criterion) const {
    check_size(weights);
    const detail::SpdSummary info =
        detail::spd_summary(information(weights), "information matrix");
    Evaluation out;
    Matrix kernel;
    if (criterion == Criterion::DTheta) {
      out.objective = -info.log_det;
      kernel = info.inverse;
    } else {
      const Matrix b = info.inverse * contrast_.transpose();
      const detail::SpdSummary v = detail::spd_summary(
          contrast_ * b, "treatment variance matrix");
      out.objective = v.log_det;
      kernel = b * v.inverse * b.transpose();
    }
    out.sensitivities.resize(sequence_count());
    for (int i = 0; i < sequence_count(); ++i) {
      out.sensitivities(i) =
          contributions_[static_cast<std::size_t>(i)].gram.cwiseProduct(kernel)
              .sum();
    }
    return out;
  }

 private:
  void check_size(std::span<const double> weights) const {
    if (weights.size() != sequences_.size()) {
      throw ValidationError("got " + std::to_string(weights.size()) +
                            " weights for " +
                            std::to_string(sequences_.size()) + " sequences");
    }
  }

  ModelSpec spec_;
  std::vector<TreatmentSequence> sequences_;
  std::vector<SequenceContribution> contributions_;
  Matrix contrast_;
};

// Objective value of a design: -ln det M for the full-parameter
// criterion, ln det(H M^-1 H') for the treatment-contrast criterion.
inline double objective(const CrossoverDesign& design, const ModelSpec& spec,
                        Criterion criterion) {
  const DesignProblem problem(design.sequences(), spec);
  return problem.objective(design.proportions(), criterion);
}

// Sensitivity of one candidate sequence (0-based index) at a design.
inline double sensitivity(const CrossoverDesign& design, const ModelSpec& spec,
                          Criterion criterion, int index) {
  if (index < 0 || index >= design.size()) {
    throw ValidationError("sequence index " + std::to_string(index) +
                          " out of range");
  }
  const DesignProblem problem(design.sequences(), spec);
  return problem.sensitivities(design.proportions(), criterion)(index);
}

// Gateaux derivative of the objective at the design toward putting all
// mass on sequence `index`; zero on the support at optimality,
// nonnegative everywhere at optimality.
inline double directional_derivative(const CrossoverDesign& design,
                                     const ModelSpec& spec,
                                     Criterion criterion, int index) {
  return criterion_bound(criterion, spec) -
         sensitivity(design, spec, criterion, index);
}

// All sensitivities, the criterion bound and the directional
// derivatives of a design in one evaluation.
struct SensitivityProfile {
  Vector values;
  double bound = 0.0;
  Vector directional_derivatives;
};

inline SensitivityProfile sensitivity_profile(const CrossoverDesign& design,
                                              const ModelSpec& spec,
                                              Criterion criterion) {
  const DesignProblem problem(design.sequences(), spec);
  SensitivityProfile out;
  out.values = problem.sensitivities(design.proportions(), criterion);
  out.bound = problem.bound(criterion);
  out.directional_derivatives =
      Vector::Constant(design.size(), out.bound) - out.values;
  return out;
}

}  // namespace xover
