#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "xover/common.hpp"
#include "xover/criteria.hpp"
#include "xover/design.hpp"
#include "xover/glm.hpp"

namespace xover {

// Classification of one candidate sequence in a verification report.
// Supported sequences must sit at the bound; zero-allocation sequences
// must sit at or below it.
enum class SequenceStatus {
  SupportedOk,
  SupportedViolation,
  ZeroOk,
  ZeroViolation,
};

inline std::string to_string(SequenceStatus status) {
  switch (status) {
    case SequenceStatus::SupportedOk:
      return "supported_ok";
    case SequenceStatus::SupportedViolation:
      return "supported_violation";
    case SequenceStatus::ZeroOk:
      return "zero_ok";
    case SequenceStatus::ZeroViolation:
      return "zero_violation";
  }
  throw ValidationError("invalid sequence status");
}

struct VerificationReport {
  Criterion criterion = Criterion::DTheta;
  bool optimal = false;
  double bound = 0.0;
  double tolerance = 0.0;
  double zero_threshold = 0.0;
  double objective = 0.0;
  double max_violation = 0.0;
  int worst_index = 0;
  std::vector<TreatmentSequence> sequences;
  std::vector<double> proportions;
  Vector sensitivities;
  Vector directional_derivatives;
  std::vector<SequenceStatus> statuses;
};

namespace detail {

inline VerificationReport verify_weights(
    const DesignProblem& problem, const std::vector<double>& weights,
    Criterion criterion, double tolerance, double zero_threshold) {
  if (!(tolerance > 0.0)) {
    throw ValidationError("verification tolerance must be positive");
  }
  const auto eval = problem.evaluate(weights, criterion);
  const double bound = problem.bound(criterion);
  const std::size_t k = weights.size();

  VerificationReport report;
  report.criterion = criterion;
  report.bound = bound;
  report.tolerance = tolerance;
  report.zero_threshold = zero_threshold;
  report.objective = eval.objective;
  report.sequences = problem.sequences();
  report.proportions = weights;
  report.sensitivities = eval.sensitivities;
  report.directional_derivatives =
      Vector::Constant(static_cast<Eigen::Index>(k), bound) -
      eval.sensitivities;
  report.statuses.reserve(k);

  double worst = -1.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double s = eval.sensitivities(static_cast<Eigen::Index>(i));
    double violation;
    if (weights[i] > zero_threshold) {
      violation = std::abs(s - bound);
      report.statuses.push_back(violation <= tolerance
                                    ? SequenceStatus::SupportedOk
                                    : SequenceStatus::SupportedViolation);
    } else {
      violation = std::max(0.0, s - bound);
      report.statuses.push_back(violation <= tolerance
                                    ? SequenceStatus::ZeroOk
                                    : SequenceStatus::ZeroViolation);
    }
    if (violation > worst) {
      worst = violation;
      report.worst_index = static_cast<int>(i);
    }
  }
  report.max_violation = worst;
  report.optimal = worst <= tolerance;
  return report;
}

}  // namespace detail

// Checks the equivalence-theorem conditions at a design: every
// supported sequence's sensitivity equals the criterion bound and no
// sequence exceeds it, all within `tolerance` on the sensitivity
// scale.
inline VerificationReport verify_optimality(const CrossoverDesign& design,
                                            const ModelSpec& spec,
                                            Criterion criterion,
                                            double tolerance = 1e-4,
                                            double zero_threshold = 1e-8) {
  const DesignProblem problem(design.sequences(), spec);
  return detail::verify_weights(problem, design.proportions(), criterion,
                                tolerance, zero_threshold);
}

// Same check over an enlarged candidate set: the extra sequences are
// treated as zero-allocation points, so they must not beat the bound.
// Certifies optimality against candidates the design never supported.
inline VerificationReport verify_augmented(
    const CrossoverDesign& design, const ModelSpec& spec, Criterion criterion,
    const std::vector<TreatmentSequence>& extra_sequences,
    double tolerance = 1e-4, double zero_threshold = 1e-8) {
  std::vector<TreatmentSequence> all = design.sequences();
  for (const auto& extra : extra_sequences) {
    if (std::find(all.begin(), all.end(), extra) != all.end()) {
      throw ValidationError("augmented sequence " + extra.str() +
                            " duplicates an existing candidate");
    }
    all.push_back(extra);
  }
  std::vector<double> weights = design.proportions();
  weights.resize(all.size(), 0.0);
  const DesignProblem problem(std::move(all), spec);
  return detail::verify_weights(problem, weights, criterion, tolerance,
                                zero_threshold);
}

}  // namespace xover
