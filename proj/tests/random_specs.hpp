#pragma once

// Deterministic random problem generator shared by the property suite
// and the acceptance checks.  Draws a model layout, a canonical
// family/link pair, a working correlation and a candidate sequence set
// whose uniform design is estimable, so every generated problem can be
// evaluated without further guards.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include "xover/xover.hpp"

namespace random_specs {

struct RandomProblem {
  xover::ModelSpec model;
  std::vector<xover::TreatmentSequence> sequences;
};

inline std::vector<double> draw_interior_weights(std::mt19937& rng, int k,
                                                 double floor = 0.05) {
  std::exponential_distribution<double> exp1(1.0);
  std::vector<double> w(static_cast<std::size_t>(k));
  double total = 0.0;
  for (double& v : w) {
    v = floor + exp1(rng);
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

// One random problem with t, p up to the given limits, theta uniform in
// [-range, range], alpha from {0, 0.1, 0.5} and k candidate sequences
// drawn without replacement from the full universe.  Returns nothing
// when the drawn candidate set cannot estimate the model, in which case
// the caller redraws.
inline std::optional<RandomProblem> try_draw_problem(std::mt19937& rng,
                                                     int max_t = 4,
                                                     int max_p = 4,
                                                     double theta_range = 3.0,
                                                     int max_extra = 2) {
  std::uniform_int_distribution<int> t_dist(2, max_t);
  std::uniform_int_distribution<int> p_dist(2, max_p);
  std::uniform_real_distribution<double> theta_dist(-theta_range, theta_range);
  std::uniform_int_distribution<int> family_dist(0, 2);
  std::uniform_int_distribution<int> structure_dist(0, 2);
  std::uniform_int_distribution<int> alpha_dist(0, 2);

  RandomProblem problem;
  const int t = t_dist(rng);
  const int p = p_dist(rng);
  problem.model.treatment_count = t;
  problem.model.period_count = p;
  switch (family_dist(rng)) {
    case 0:
      problem.model.family = xover::Family::Bernoulli;
      problem.model.link = xover::Link::Logit;
      break;
    case 1:
      problem.model.family = xover::Family::Poisson;
      problem.model.link = xover::Link::Log;
      break;
    default:
      problem.model.family = xover::Family::Gaussian;
      problem.model.link = xover::Link::Identity;
      break;
  }
  const double alphas[] = {0.0, 0.1, 0.5};
  switch (structure_dist(rng)) {
    case 0:
      problem.model.correlation = {xover::CorrelationStructure::AR1,
                                   alphas[alpha_dist(rng)]};
      break;
    case 1:
      problem.model.correlation = {
          xover::CorrelationStructure::CompoundSymmetry,
          alphas[alpha_dist(rng)]};
      break;
    default:
      problem.model.correlation = {xover::CorrelationStructure::Independence,
                                   0.0};
      break;
  }
  const int m = xover::parameter_count(t, p);
  problem.model.theta = xover::Vector(m);
  for (int i = 0; i < m; ++i) problem.model.theta(i) = theta_dist(rng);

  auto universe = xover::enumerate_sequences(t, p);
  std::shuffle(universe.begin(), universe.end(), rng);
  const int k_min = (m + p - 1) / p;
  std::uniform_int_distribution<int> extra_dist(0, max_extra);
  const int k = std::min(static_cast<int>(universe.size()),
                         k_min + extra_dist(rng));
  problem.sequences.assign(universe.begin(), universe.begin() + k);

  try {
    const xover::DesignProblem check(problem.sequences, problem.model);
    const std::vector<double> uniform(
        static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
    check.objective(uniform, xover::Criterion::DTau);
  } catch (const xover::Error&) {
    return std::nullopt;
  }
  return problem;
}

inline RandomProblem draw_problem(std::mt19937& rng, int max_t = 4,
                                  int max_p = 4, double theta_range = 3.0,
                                  int max_extra = 2) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    auto problem = try_draw_problem(rng, max_t, max_p, theta_range, max_extra);
    if (problem) return *std::move(problem);
  }
  throw xover::NumericError("no estimable random problem in 200 draws");
}

}  // namespace random_specs
