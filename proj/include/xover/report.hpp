#pragma once

#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "xover/criteria.hpp"
#include "xover/optimize.hpp"
#include "xover/verify.hpp"

namespace xover {

// Numbers are rendered with 12 significant digits and a dot decimal
// separator regardless of locale.
inline std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return std::string(buffer);
}

// One row of a criterion profile along a one-dimensional slice of the
// simplex.  Missing entries mark grid points where the information
// matrix is singular.
struct SweepRow {
  double p_i = 0.0;
  std::optional<double> objective;
  std::optional<double> directional_derivative;
};

// Profiles the objective and the directional derivative toward
// sequence `index` along a straight path through the simplex.  With
// two candidate sequences the path is the whole simplex,
// (p_i, 1 - p_i) for p_i in [0, 1].  With more, the path runs from the
// base design straight to vertex `index`, rescaling the remaining mass
// proportionally.
inline std::vector<SweepRow> compute_sweep(
    const std::vector<TreatmentSequence>& sequences, const ModelSpec& spec,
    Criterion criterion, int index, int grid,
    std::optional<std::vector<double>> base = {}) {
  if (grid < 2) {
    throw ValidationError("sweep needs at least 2 grid points");
  }
  const DesignProblem problem(sequences, spec);
  const std::size_t k = static_cast<std::size_t>(problem.sequence_count());
  if (index < 0 || index >= static_cast<int>(k)) {
    throw ValidationError("sweep index " + std::to_string(index) +
                          " out of range");
  }
  std::vector<double> base_weights =
      base.value_or(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  if (base_weights.size() != k) {
    throw ValidationError("sweep base has " +
                          std::to_string(base_weights.size()) +
                          " entries, expected " + std::to_string(k));
  }
  const double bound = problem.bound(criterion);

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(grid));
  std::vector<double> w(k);
  for (int step = 0; step < grid; ++step) {
    const double u = static_cast<double>(step) / (grid - 1);
    if (k == 2) {
      w[static_cast<std::size_t>(index)] = u;
      w[static_cast<std::size_t>(1 - index)] = 1.0 - u;
    } else {
      for (std::size_t i = 0; i < k; ++i) {
        w[i] = (1.0 - u) * base_weights[i];
      }
      w[static_cast<std::size_t>(index)] += u;
    }
    SweepRow row;
    row.p_i = w[static_cast<std::size_t>(index)];
    try {
      const auto eval = problem.evaluate(w, criterion);
      row.objective = eval.objective;
      row.directional_derivative =
          bound - eval.sensitivities(static_cast<Eigen::Index>(index));
    } catch (const SingularMatrixError&) {
      // Row stays empty; the design at this grid point cannot estimate
      // the full parameter vector.
    }
    rows.push_back(row);
  }
  return rows;
}

inline void write_sweep_csv(std::ostream& out,
                            const std::vector<SweepRow>& rows) {
  out << "p_i,objective,directional_derivative\n";
  for (const auto& row : rows) {
    out << format_number(row.p_i) << ',';
    if (row.objective) out << format_number(*row.objective);
    out << ',';
    if (row.directional_derivative) {
      out << format_number(*row.directional_derivative);
    }
    out << '\n';
  }
}

inline void render_verification_report(std::ostream& out,
                                       const VerificationReport& report) {
  out << "criterion:      " << to_string(report.criterion) << '\n'
      << "objective:      " << format_number(report.objective) << '\n'
      << "bound:          " << format_number(report.bound) << '\n'
      << "tolerance:      " << format_number(report.tolerance) << '\n'
      << "max violation:  " << format_number(report.max_violation)
      << "  (sequence " << report.sequences[static_cast<std::size_t>(
                               report.worst_index)].str()
      << ")\n\n";
  out << "sequence  proportion        sensitivity       derivative        status\n";
  for (std::size_t i = 0; i < report.sequences.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-8s  %-16.10g  %-16.10g  %-16.10g  %s",
                  report.sequences[i].str().c_str(), report.proportions[i],
                  report.sensitivities(static_cast<Eigen::Index>(i)),
                  report.directional_derivatives(static_cast<Eigen::Index>(i)),
                  to_string(report.statuses[i]).c_str());
    out << line << '\n';
  }
  out << "\nverdict: " << (report.optimal ? "optimal" : "not optimal")
      << " at tolerance " << format_number(report.tolerance) << '\n';
}

inline nlohmann::json verification_report_to_json(
    const VerificationReport& report) {
  nlohmann::json j;
  j["criterion"] = to_string(report.criterion);
  j["optimal"] = report.optimal;
  j["bound"] = report.bound;
  j["tolerance"] = report.tolerance;
  j["zero_threshold"] = report.zero_threshold;
  j["objective"] = report.objective;
  j["max_violation"] = report.max_violation;
  j["worst_index"] = report.worst_index;
  j["sequences"] = nlohmann::json::array();
  j["proportions"] = report.proportions;
  j["sensitivities"] = nlohmann::json::array();
  j["directional_derivatives"] = nlohmann::json::array();
  j["statuses"] = nlohmann::json::array();
  for (std::size_t i = 0; i < report.sequences.size(); ++i) {
    j["sequences"].push_back(report.sequences[i].str());
    j["sensitivities"].push_back(
        report.sensitivities(static_cast<Eigen::Index>(i)));
    j["directional_derivatives"].push_back(
        report.directional_derivatives(static_cast<Eigen::Index>(i)));
    j["statuses"].push_back(to_string(report.statuses[i]));
  }
  return j;
}

inline void render_optimization_result(std::ostream& out,
                                       const OptimizationResult& result) {
  out << "method:        " << to_string(result.method) << '\n'
      << "criterion bound: " << format_number(result.profile.bound) << '\n'
      << "iterations:    " << result.iterations << '\n'
      << "converged:     " << (result.converged ? "yes" : "no") << '\n'
      << "objective:     " << format_number(result.objective) << '\n'
      << "max violation: " << format_number(result.max_violation) << "\n\n";
  out << "sequence  proportion        sensitivity\n";
  for (int i = 0; i < result.design.size(); ++i) {
    char line[120];
    std::snprintf(line, sizeof(line), "%-8s  %-16.10g  %-16.10g",
                  result.design.sequence(i).str().c_str(),
                  result.design.proportion(i),
                  result.profile.values(i));
    out << line << '\n';
  }
}

inline nlohmann::json optimization_result_to_json(
    const OptimizationResult& result, Criterion criterion) {
  nlohmann::json j;
  j["criterion"] = to_string(criterion);
  j["method"] = to_string(result.method);
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["objective"] = result.objective;
  j["bound"] = result.profile.bound;
  j["max_violation"] = result.max_violation;
  j["sequences"] = nlohmann::json::array();
  j["proportions"] = nlohmann::json::array();
  j["sensitivities"] = nlohmann::json::array();
  j["directional_derivatives"] = nlohmann::json::array();
  for (int i = 0; i < result.design.size(); ++i) {
    j["sequences"].push_back(result.design.sequence(i).str());
    j["proportions"].push_back(result.design.proportion(i));
    j["sensitivities"].push_back(result.profile.values(i));
    j["directional_derivatives"].push_back(
        result.profile.directional_derivatives(i));
  }
  return j;
}

}  // namespace xover
