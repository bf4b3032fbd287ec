#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "xover/common.hpp"
#include "xover/sequence.hpp"

namespace xover {

// Number of free model parameters: intercept, p-1 period effects, t-1
// treatment effects and t-1 carryover effects, with the first level of
// each factor fixed at zero.
inline int parameter_count(int treatment_count, int period_count) {
  return period_count + 2 * treatment_count - 2;
}

// Per-subject design matrix of a sequence, p rows by p + 2t - 2
// columns: intercept, period indicators for periods 2..p, treatment
// indicators for treatments 2..t, carryover indicators for treatments
// 2..t.  A carryover indicator marks the treatment given one period
// earlier; the first period has no carryover, so its carryover block is
// all zeros.
inline Matrix design_matrix(const TreatmentSequence& sequence) {
  const int p = sequence.period_count();
  const int t = sequence.treatment_count();
  const int m = parameter_count(t, p);

  Matrix x = Matrix::Zero(p, m);
  x.col(0).setOnes();
  for (int i = 1; i < p; ++i) {
    x(i, i) = 1.0;
  }
  for (int i = 0; i < p; ++i) {
    const int s = sequence.label(i);
    if (s >= 2) {
      x(i, p - 1 + s - 1) = 1.0;
    }
  }
  for (int i = 1; i < p; ++i) {
    const int s = sequence.label(i - 1);
    if (s >= 2) {
      x(i, p + t - 2 + s - 1) = 1.0;
    }
  }
  return x;
}

// Contrast matrix selecting the treatment effects: (t-1) x m with an
// identity block over the treatment-indicator columns and zeros
// elsewhere.
inline Matrix contrast_matrix(int treatment_count, int period_count) {
  if (treatment_count < 2 || period_count < 2) {
    throw ValidationError("contrast matrix needs at least 2 treatments and 2 periods");
  }
  const int m = parameter_count(treatment_count, period_count);
  Matrix h = Matrix::Zero(treatment_count - 1, m);
  h.block(0, period_count, treatment_count - 1, treatment_count - 1)
      .setIdentity();
  return h;
}

// An approximate crossover design: distinct treatment sequences
// paired with the proportions of subjects assigned to each.
class CrossoverDesign {
 public:
  CrossoverDesign(std::vector<TreatmentSequence> sequences,
                  std::vector<double> proportions)
      : sequences_(std::move(sequences)), proportions_(std::move(proportions)) {
    validate();
  }

  static CrossoverDesign uniform(std::vector<TreatmentSequence> sequences) {
    const std::size_t k = sequences.size();
    if (k == 0) {
      throw ValidationError("design must contain at least one sequence");
    }
    return CrossoverDesign(std::move(sequences),
                           std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  int size() const noexcept { return static_cast<int>(sequences_.size()); }
  int treatment_count() const noexcept {
    return sequences_.front().treatment_count();
  }
  int period_count() const noexcept {
    return sequences_.front().period_count();
  }

  const std::vector<TreatmentSequence>& sequences() const noexcept {
    return sequences_;
  }
  const TreatmentSequence& sequence(int i) const {
    return sequences_.at(static_cast<std::size_t>(i));
  }
  const std::vector<double>& proportions() const noexcept {
    return proportions_;
  }
  double proportion(int i) const {
    return proportions_.at(static_cast<std::size_t>(i));
  }

  // Same sequences, new weights.
  CrossoverDesign with_proportions(std::vector<double> proportions) const {
    return CrossoverDesign(sequences_, std::move(proportions));
  }

 private:
  void validate() const {
    if (sequences_.empty()) {
      throw ValidationError("design must contain at least one sequence");
    }
    if (sequences_.size() != proportions_.size()) {
      throw ValidationError("got " + std::to_string(sequences_.size()) +
                            " sequences but " +
                            std::to_string(proportions_.size()) +
                            " proportions");
    }
    const int t = sequences_.front().treatment_count();
    const int p = sequences_.front().period_count();
    for (const auto& s : sequences_) {
      if (s.treatment_count() != t || s.period_count() != p) {
        throw ValidationError("all sequences in a design must share the same "
                              "treatment count and period count");
      }
    }
    auto sorted = sequences_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ValidationError("design sequences must be distinct");
    }
    double sum = 0.0;
    for (double w : proportions_) {
      if (!(w >= 0.0)) {
        throw ValidationError("proportions must be nonnegative");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
      throw ValidationError("proportions must sum to 1 (got " +
                            std::to_string(sum) + ")");
    }
  }

  std::vector<TreatmentSequence> sequences_;
  std::vector<double> proportions_;
};

}  // namespace xover
