// Minimal library walkthrough: set up a two-treatment, two-period
// crossover model with a binary response, find the locally D-optimal
// allocation for both criteria, and certify it with the equivalence
// theorem.

#include <iostream>

#include "xover/xover.hpp"

int main() {
  using namespace xover;

  ModelSpec model;
  model.treatment_count = 2;
  model.period_count = 2;
  model.family = Family::Bernoulli;
  model.link = Link::Logit;
  model.theta = Vector(4);
  model.theta << 0.5, -1.0, 4.0, -2.0;  // intercept, period, treatment, carryover
  model.correlation = {CorrelationStructure::AR1, 0.1};

  const std::vector<TreatmentSequence> candidates = {
      parse_sequence("AB", 2),
      parse_sequence("BA", 2),
  };

  for (const Criterion criterion : {Criterion::DTheta, Criterion::DTau}) {
    const OptimizationResult result = optimize(candidates, model, criterion);
    const VerificationReport report =
        verify_optimality(result.design, model, criterion);

    std::cout << "criterion " << to_string(criterion) << ": ";
    for (int i = 0; i < result.design.size(); ++i) {
      std::cout << result.design.sequence(i).str() << "="
                << format_number(result.design.proportion(i)) << ' ';
    }
    std::cout << (report.optimal ? "(verified optimal)" : "(not optimal)")
              << '\n';
  }
  return 0;
}
