#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "xover/common.hpp"
#include "xover/criteria.hpp"
#include "xover/design.hpp"
#include "xover/glm.hpp"

namespace xover {

enum class OptimizeMethod { Multiplicative, ProjectedGradient, EquivalenceNewton };

inline std::string to_string(OptimizeMethod method) {
  switch (method) {
    case OptimizeMethod::Multiplicative:
      return "multiplicative";
    case OptimizeMethod::ProjectedGradient:
      return "projected_gradient";
    case OptimizeMethod::EquivalenceNewton:
      return "equivalence_newton";
  }
  throw ValidationError("invalid optimizer method");
}

inline OptimizeMethod optimize_method_from_string(const std::string& name) {
  if (name == "multiplicative") return OptimizeMethod::Multiplicative;
  if (name == "projected_gradient") return OptimizeMethod::ProjectedGradient;
  if (name == "equivalence_newton") return OptimizeMethod::EquivalenceNewton;
  throw ValidationError("unknown optimizer method '" + name +
                        "' (expected 'multiplicative', 'projected_gradient' "
                        "or 'equivalence_newton')");
}

struct OptimizerOptions {
  // Default method depends on the criterion; see optimize().
  std::optional<OptimizeMethod> method;
  int max_iterations = 100000;
  // Convergence threshold on the equivalence-theorem scale: largest
  // deviation of a supported sensitivity from the bound, or excess of
  // an unsupported sensitivity above it.
  double tolerance = 1e-6;
  // Proportions at or below this count as zero allocations.
  double zero_threshold = 1e-8;
  // Starting proportions; uniform when absent.
  std::optional<std::vector<double>> initial;
};

struct OptimizationResult {
  CrossoverDesign design;
  double objective = 0.0;
  SensitivityProfile profile;
  double max_violation = 0.0;
  int iterations = 0;
  bool converged = false;
  OptimizeMethod method = OptimizeMethod::Multiplicative;
};

namespace detail {

// Euclidean projection onto the probability simplex.
inline void project_to_simplex(std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double threshold = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    cumsum += u[j];
    const double candidate = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - candidate > 0.0) {
      threshold = candidate;
    }
  }
  double sum = 0.0;
  for (double& x : v) {
    x = std::max(0.0, x - threshold);
    sum += x;
  }
  // Keep the simplex sum exact against accumulated roundoff.
  if (sum > 0.0) {
    for (double& x : v) x /= sum;
  }
}

inline double equivalence_violation(const std::vector<double>& weights,
                                    const Vector& sensitivities, double bound,
                                    double zero_threshold) {
  double worst = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double s = sensitivities(static_cast<Eigen::Index>(i));
    const double v = weights[i] > zero_threshold ? std::abs(s - bound)
                                                 : std::max(0.0, s - bound);
    worst = std::max(worst, v);
  }
  return worst;
}

inline std::vector<double> resolve_initial_weights(
    const OptimizerOptions& options, std::size_t k) {
  if (!options.initial) {
    return std::vector<double>(k, 1.0 / static_cast<double>(k));
  }
  std::vector<double> w = *options.initial;
  if (w.size() != k) {
    throw ValidationError("initial proportions have " +
                          std::to_string(w.size()) + " entries, expected " +
                          std::to_string(k));
  }
  double sum = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) {
      throw ValidationError("initial proportions must be nonnegative");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw ValidationError("initial proportions must sum to 1 (got " +
                          std::to_string(sum) + ")");
  }
  for (double& x : w) x /= sum;
  return w;
}

struct NewtonOptions {
  int max_iterations = 100;
  double tolerance = 1e-9;  // max-norm of the residual
  double fd_step = 1e-7;    // forward-difference Jacobian step
};

struct NewtonOutcome {
  std::vector<double> weights;  // full length, zero off the support
  Vector residual;              // one entry per support index, plus the sum
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string failure;
};

// Damped Gauss-Newton on the stationarity system of the equivalence
// theorem restricted to a support set: sensitivities on the support
// equal the bound, off-support proportions stay at zero, and the
// support proportions sum to one.
inline NewtonOutcome newton_equivalence(const DesignProblem& problem,
                                        Criterion criterion,
                                        const std::vector<int>& support,
                                        std::vector<double> start,
                                        const NewtonOptions& options) {
  const std::size_t k = static_cast<std::size_t>(problem.sequence_count());
  const std::size_t s_count = support.size();
  const double bound = problem.bound(criterion);

  const auto residual_at = [&](const std::vector<double>& full) -> Vector {
    const Vector sens = problem.sensitivities(full, criterion);
    Vector r(s_count + 1);
    double sum = 0.0;
    for (std::size_t j = 0; j < s_count; ++j) {
      r(static_cast<Eigen::Index>(j)) =
          sens(support[j]) - bound;
      sum += full[static_cast<std::size_t>(support[j])];
    }
    r(static_cast<Eigen::Index>(s_count)) = sum - 1.0;
    return r;
  };

  NewtonOutcome out;
  out.weights = std::move(start);
  out.residual = residual_at(out.weights);
  out.residual_norm = out.residual.cwiseAbs().maxCoeff();

  while (out.residual_norm >= options.tolerance) {
    if (out.iterations >= options.max_iterations) {
      out.failure = "no convergence in " +
                    std::to_string(options.max_iterations) +
                    " iterations (residual " +
                    std::to_string(out.residual_norm) + ")";
      return out;
    }
    Matrix jacobian(s_count + 1, s_count);
    for (std::size_t j = 0; j < s_count; ++j) {
      std::vector<double> bumped = out.weights;
      bumped[static_cast<std::size_t>(support[j])] += options.fd_step;
      jacobian.col(static_cast<Eigen::Index>(j)) =
          (residual_at(bumped) - out.residual) / options.fd_step;
    }
    const Vector delta = jacobian.colPivHouseholderQr().solve(-out.residual);

    bool accepted = false;
    double scale = 1.0;
    for (int halving = 0; halving < 60; ++halving) {
      std::vector<double> trial = out.weights;
      for (std::size_t j = 0; j < s_count; ++j) {
        trial[static_cast<std::size_t>(support[j])] +=
            scale * delta(static_cast<Eigen::Index>(j));
      }
      try {
        const Vector trial_r = residual_at(trial);
        const double trial_norm = trial_r.cwiseAbs().maxCoeff();
        if (trial_norm < out.residual_norm) {
          out.weights = std::move(trial);
          out.residual = trial_r;
          out.residual_norm = trial_norm;
          accepted = true;
          break;
        }
      } catch (const SingularMatrixError&) {
        // Trial point left the region where M is invertible.
      }
      scale *= 0.5;
    }
    if (!accepted) {
      out.failure = "stalled at residual " + std::to_string(out.residual_norm);
      return out;
    }
    ++out.iterations;
  }
  out.converged = true;
  (void)k;
  return out;
}

inline std::vector<int> full_support(int k) {
  std::vector<int> support(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) support[static_cast<std::size_t>(i)] = i;
  return support;
}

}  // namespace detail

// One step of the classical multiplicative reweighting
// p_i <- p_i * sensitivity_i / bound.  Its fixed points are exactly
// the designs whose supported sensitivities all equal the bound, and a
// zero proportion stays zero.
inline CrossoverDesign multiplicative_step(const CrossoverDesign& design,
                                           const ModelSpec& spec,
                                           Criterion criterion) {
  const DesignProblem problem(design.sequences(), spec);
  const Vector sens = problem.sensitivities(design.proportions(), criterion);
  const double bound = problem.bound(criterion);
  std::vector<double> w = design.proportions();
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] *= sens(static_cast<Eigen::Index>(i)) / bound;
    sum += w[i];
  }
  for (double& x : w) x /= sum;
  return design.with_proportions(std::move(w));
}

// Finds the proportions minimizing the criterion objective over the
// candidate sequences.  Default method per criterion:
//
//   full-parameter:      multiplicative reweighting, the classical
//                        monotone update for this objective;
//   treatment-contrast:  projected gradient with Armijo backtracking,
//                        since the multiplicative step has no
//                        monotonicity guarantee for the contrast
//                        objective.
//
// Both stop when the equivalence-theorem violation drops to
// options.tolerance, so a converged result is certifiably optimal.
// Without convergence the best iterate found is returned with
// converged = false.
inline OptimizationResult optimize(
    const std::vector<TreatmentSequence>& sequences, const ModelSpec& spec,
    Criterion criterion, const OptimizerOptions& options = {}) {
  if (options.max_iterations < 1) {
    throw ValidationError("max_iterations must be at least 1");
  }
  if (!(options.tolerance > 0.0)) {
    throw ValidationError("tolerance must be positive");
  }
  if (!(options.zero_threshold > 0.0)) {
    throw ValidationError("zero_threshold must be positive");
  }
  const DesignProblem problem(sequences, spec);
  const std::size_t k = static_cast<std::size_t>(problem.sequence_count());
  const double bound = problem.bound(criterion);
  const OptimizeMethod method = options.method.value_or(
      criterion == Criterion::DTheta ? OptimizeMethod::Multiplicative
                                     : OptimizeMethod::ProjectedGradient);

  std::vector<double> w = detail::resolve_initial_weights(options, k);
  DesignProblem::Evaluation eval = problem.evaluate(w, criterion);
  double violation = detail::equivalence_violation(
      w, eval.sensitivities, bound, options.zero_threshold);
  int iterations = 0;

  std::vector<double> best_w = w;
  double best_objective = eval.objective;

  if (method == OptimizeMethod::EquivalenceNewton) {
    std::vector<int> support;
    for (std::size_t i = 0; i < k; ++i) {
      if (w[i] > options.zero_threshold) {
        support.push_back(static_cast<int>(i));
      }
    }
    detail::NewtonOptions newton_options;
    newton_options.max_iterations = std::min(options.max_iterations, 200);
    const detail::NewtonOutcome outcome = detail::newton_equivalence(
        problem, criterion, support, w, newton_options);
    iterations = outcome.iterations;
    w = outcome.weights;
    // A Newton excursion can leave the simplex; pull it back before
    // reporting, which keeps a converged interior root unchanged.
    detail::project_to_simplex(w);
    eval = problem.evaluate(w, criterion);
    violation = detail::equivalence_violation(w, eval.sensitivities, bound,
                                              options.zero_threshold);
    if (eval.objective < best_objective) {
      best_w = w;
      best_objective = eval.objective;
    }
  } else {
    double step = 1.0;
    while (violation > options.tolerance &&
           iterations < options.max_iterations) {
      if (method == OptimizeMethod::Multiplicative) {
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
          w[i] *= eval.sensitivities(static_cast<Eigen::Index>(i)) / bound;
          sum += w[i];
        }
        for (double& x : w) x /= sum;
        eval = problem.evaluate(w, criterion);
      } else {
        // The gradient with respect to the weights is -s, so the trial
        // point is the projection of w + step * s.
        bool accepted = false;
        while (step >= 1e-18) {
          std::vector<double> trial = w;
          for (std::size_t i = 0; i < k; ++i) {
            trial[i] +=
                step * eval.sensitivities(static_cast<Eigen::Index>(i));
          }
          detail::project_to_simplex(trial);
          double directional = 0.0;  // gradient dot (trial - w)
          for (std::size_t i = 0; i < k; ++i) {
            directional -= eval.sensitivities(static_cast<Eigen::Index>(i)) *
                           (trial[i] - w[i]);
          }
          try {
            const DesignProblem::Evaluation trial_eval =
                problem.evaluate(trial, criterion);
            if (trial_eval.objective <=
                eval.objective + 1e-4 * directional) {
              w = std::move(trial);
              eval = trial_eval;
              accepted = true;
              step *= 2.0;
              break;
            }
          } catch (const SingularMatrixError&) {
            // Step reached a rank-deficient corner of the simplex;
            // treat as a failed trial and shorten.
          }
          step *= 0.5;
        }
        if (!accepted) break;  // line search exhausted at this precision
      }
      ++iterations;
      violation = detail::equivalence_violation(w, eval.sensitivities, bound,
                                                options.zero_threshold);
      if (eval.objective < best_objective) {
        best_w = w;
        best_objective = eval.objective;
      }
    }
  }

  const bool converged = violation <= options.tolerance;
  if (!converged && best_objective < eval.objective) {
    w = best_w;
    eval = problem.evaluate(w, criterion);
    violation = detail::equivalence_violation(w, eval.sensitivities, bound,
                                              options.zero_threshold);
  }

  OptimizationResult result{
      .design = CrossoverDesign(problem.sequences(), w),
      .objective = eval.objective,
      .profile =
          SensitivityProfile{
              .values = eval.sensitivities,
              .bound = bound,
              .directional_derivatives =
                  Vector::Constant(static_cast<Eigen::Index>(k), bound) -
                  eval.sensitivities,
          },
      .max_violation = violation,
      .iterations = iterations,
      .converged = converged,
      .method = method,
  };
  return result;
}

inline OptimizationResult optimize(const CrossoverDesign& initial,
                                   const ModelSpec& spec, Criterion criterion,
                                   OptimizerOptions options = {}) {
  options.initial = initial.proportions();
  return optimize(initial.sequences(), spec, criterion, options);
}

struct EquivalenceSolveOptions {
  int max_iterations = 100;
  // Convergence threshold on the max-norm of the residual vector.
  double tolerance = 1e-9;
  // Forward-difference step for the numerical Jacobian.
  double fd_step = 1e-7;
  // After the root is found, sequences outside the support must not
  // exceed the bound by more than this.
  double verify_tolerance = 1e-6;
};

struct EquivalenceSolveResult {
  CrossoverDesign design;
  Vector residual;
  double residual_norm = 0.0;
  int iterations = 0;
};

// Solves the equal-sensitivity system of the equivalence theorem on an
// assumed support directly:
//
//   sensitivity_i(p) = bound  for i in support,  sum p - 1 = 0,
//
// by damped Gauss-Newton with a forward-difference Jacobian, holding
// off-support proportions at zero.  A root with a negative proportion,
// or one whose off-support sensitivities exceed the bound, signals a
// wrong support guess and raises an error; optimize() is the fallback
// in that case.
inline EquivalenceSolveResult solve_equivalence_system(
    const std::vector<TreatmentSequence>& sequences, const ModelSpec& spec,
    Criterion criterion, std::optional<std::vector<int>> support = {},
    const EquivalenceSolveOptions& options = {}) {
  const DesignProblem problem(sequences, spec);
  const int k = problem.sequence_count();

  std::vector<int> support_indices =
      support.value_or(detail::full_support(k));
  if (support_indices.empty()) {
    throw ValidationError("support set must not be empty");
  }
  std::vector<bool> seen(static_cast<std::size_t>(k), false);
  for (int i : support_indices) {
    if (i < 0 || i >= k) {
      throw ValidationError("support index " + std::to_string(i) +
                            " out of range");
    }
    if (seen[static_cast<std::size_t>(i)]) {
      throw ValidationError("support index " + std::to_string(i) +
                            " repeats");
    }
    seen[static_cast<std::size_t>(i)] = true;
  }

  std::vector<double> start(static_cast<std::size_t>(k), 0.0);
  for (int i : support_indices) {
    start[static_cast<std::size_t>(i)] =
        1.0 / static_cast<double>(support_indices.size());
  }

  detail::NewtonOptions newton_options;
  newton_options.max_iterations = options.max_iterations;
  newton_options.tolerance = options.tolerance;
  newton_options.fd_step = options.fd_step;
  detail::NewtonOutcome outcome = detail::newton_equivalence(
      problem, criterion, support_indices, std::move(start), newton_options);
  if (!outcome.converged) {
    throw NumericError("equivalence system " + outcome.failure);
  }

  for (int i : support_indices) {
    if (outcome.weights[static_cast<std::size_t>(i)] < -1e-12) {
      throw NumericError(
          "equivalence system root puts a negative proportion on sequence " +
          problem.sequences()[static_cast<std::size_t>(i)].str() +
          "; the assumed support is not the optimal one");
    }
  }
  double sum = 0.0;
  for (double& x : outcome.weights) {
    x = std::max(x, 0.0);
    sum += x;
  }
  for (double& x : outcome.weights) x /= sum;

  // Off-support sequences must satisfy the inequality side of the
  // equivalence theorem, otherwise the guessed support was too small.
  const Vector sens = problem.sensitivities(outcome.weights, criterion);
  const double bound = problem.bound(criterion);
  for (int i = 0; i < k; ++i) {
    if (seen[static_cast<std::size_t>(i)]) continue;
    if (sens(i) > bound + options.verify_tolerance) {
      throw NumericError(
          "equivalence system root leaves sequence " +
          problem.sequences()[static_cast<std::size_t>(i)].str() +
          " above the bound; the assumed support is not the optimal one");
    }
  }

  EquivalenceSolveResult result{
      .design = CrossoverDesign(problem.sequences(), outcome.weights),
      .residual = outcome.residual,
      .residual_norm = outcome.residual_norm,
      .iterations = outcome.iterations,
  };
  return result;
}

struct OracleResult {
  CrossoverDesign design;
  double objective = 0.0;
  double resolution = 0.0;
  int grid = 0;
  std::size_t points_total = 0;
  std::size_t points_evaluated = 0;
  std::size_t points_skipped = 0;
};

// Exhaustive minimum over the lattice of proportions with spacing
// `resolution` (so denominators 1/resolution).  Points where the
// information matrix is not numerically positive definite are skipped.
// Ties keep the first minimizer in lexicographic enumeration order.
// Intended as an independent cross-check for optimize(), not as a
// production search.
inline OracleResult grid_oracle(const std::vector<TreatmentSequence>& sequences,
                                const ModelSpec& spec, Criterion criterion,
                                double resolution = 0.001,
                                std::size_t cap = 100000000) {
  if (!(resolution > 0.0 && resolution <= 1.0)) {
    throw ValidationError("oracle resolution must be in (0, 1]");
  }
  const int grid = static_cast<int>(std::llround(1.0 / resolution));
  const DesignProblem problem(sequences, spec);
  const int k = problem.sequence_count();

  double total = 1.0;  // C(grid + k - 1, k - 1)
  for (int i = 1; i <= k - 1; ++i) {
    total *= static_cast<double>(grid + i) / static_cast<double>(i);
  }
  if (total > static_cast<double>(cap)) {
    throw ValidationError("lattice of about " + std::to_string(total) +
                          " points exceeds cap of " + std::to_string(cap));
  }

  const int m = problem.parameter_count();
  const Matrix& contrast = problem.contrast();
  Matrix info(m, m);
  Eigen::LLT<Matrix> llt(m);
  const auto& contributions = problem.contributions();

  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  std::vector<double> best_weights;
  double best_objective = 0.0;
  bool have_best = false;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;

  const auto evaluate_point = [&]() {
    ++evaluated;
    info.setZero();
    for (int i = 0; i < k; ++i) {
      const int c = counts[static_cast<std::size_t>(i)];
      if (c == 0) continue;
      info += (static_cast<double>(c) / grid) *
              contributions[static_cast<std::size_t>(i)].gram;
    }
    llt.compute(info);
    if (llt.info() != Eigen::Success) {
      ++skipped;
      return;
    }
    double objective;
    if (criterion == Criterion::DTheta) {
      objective = -2.0 * llt.matrixLLT().diagonal().array().log().sum();
    } else {
      const Matrix v = contrast * llt.solve(contrast.transpose());
      Eigen::LLT<Matrix> vllt(v);
      if (vllt.info() != Eigen::Success) {
        ++skipped;
        return;
      }
      objective = 2.0 * vllt.matrixLLT().diagonal().array().log().sum();
    }
    if (!std::isfinite(objective)) {
      ++skipped;
      return;
    }
    if (!have_best || objective < best_objective) {
      have_best = true;
      best_objective = objective;
      best_weights.resize(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) {
        best_weights[static_cast<std::size_t>(i)] =
            static_cast<double>(counts[static_cast<std::size_t>(i)]) / grid;
      }
    }
  };

  // Compositions of `grid` into k parts in lexicographic order.
  const std::function<void(int, int)> recurse = [&](int pos, int remaining) {
    if (pos == k - 1) {
      counts[static_cast<std::size_t>(pos)] = remaining;
      evaluate_point();
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[static_cast<std::size_t>(pos)] = c;
      recurse(pos + 1, remaining - c);
    }
  };
  recurse(0, grid);

  if (!have_best) {
    throw NumericError(
        "every lattice point has a singular information matrix");
  }

  // The lattice weights sum to 1 exactly only in rational arithmetic;
  // nudge the largest entry to absorb float roundoff.
  double sum = std::accumulate(best_weights.begin(), best_weights.end(), 0.0);
  auto largest = std::max_element(best_weights.begin(), best_weights.end());
  *largest += 1.0 - sum;

  return OracleResult{
      .design = CrossoverDesign(problem.sequences(), best_weights),
      .objective = best_objective,
      .resolution = resolution,
      .grid = grid,
      .points_total = static_cast<std::size_t>(std::llround(total)),
      .points_evaluated = evaluated,
      .points_skipped = skipped,
  };
}

}  // namespace xover
