#pragma once

#include <cmath>
#include <string>

#include "xover/common.hpp"
#include "xover/design.hpp"
#include "xover/working_correlation.hpp"

namespace xover {

enum class Family { Bernoulli, Poisson, Gaussian };
enum class Link { Logit, Log, Identity };

inline std::string to_string(Family family) {
  switch (family) {
    case Family::Bernoulli:
      return "bernoulli";
    case Family::Poisson:
      return "poisson";
    case Family::Gaussian:
      return "gaussian";
  }
  throw ValidationError("invalid family");
}

inline Family family_from_string(const std::string& name) {
  if (name == "bernoulli") return Family::Bernoulli;
  if (name == "poisson") return Family::Poisson;
  if (name == "gaussian") return Family::Gaussian;
  throw ValidationError("unknown family '" + name +
                        "' (expected 'bernoulli', 'poisson' or 'gaussian')");
}

inline std::string to_string(Link link) {
  switch (link) {
    case Link::Logit:
      return "logit";
    case Link::Log:
      return "log";
    case Link::Identity:
      return "identity";
  }
  throw ValidationError("invalid link");
}

inline Link link_from_string(const std::string& name) {
  if (name == "logit") return Link::Logit;
  if (name == "log") return Link::Log;
  if (name == "identity") return Link::Identity;
  throw ValidationError("unknown link '" + name +
                        "' (expected 'logit', 'log' or 'identity')");
}

// Only the canonical pairs are supported: the sequence information
// contributions below rely on the GEE weights simplifying under a
// canonical link.
inline bool is_canonical_pair(Family family, Link link) {
  return (family == Family::Bernoulli && link == Link::Logit) ||
         (family == Family::Poisson && link == Link::Log) ||
         (family == Family::Gaussian && link == Link::Identity);
}

// Mean as a function of the linear predictor.  The logistic branch is
// arranged so neither tail overflows.
inline double inverse_link(double eta, Link link) {
  switch (link) {
    case Link::Logit:
      if (eta >= 0.0) {
        return 1.0 / (1.0 + std::exp(-eta));
      } else {
        const double e = std::exp(eta);
        return e / (1.0 + e);
      }
    case Link::Log:
      return std::exp(eta);
    case Link::Identity:
      return eta;
  }
  throw ValidationError("invalid link");
}

// d mu / d eta.  For logit this is exp(-|eta|) / (1 + exp(-|eta|))^2,
// which underflows gracefully instead of producing 0 * inf.
inline double inverse_link_derivative(double eta, Link link) {
  switch (link) {
    case Link::Logit: {
      const double e = std::exp(-std::abs(eta));
      const double denom = 1.0 + e;
      return e / (denom * denom);
    }
    case Link::Log:
      return std::exp(eta);
    case Link::Identity:
      return 1.0;
  }
  throw ValidationError("invalid link");
}

// Variance of the response as a function of its mean.
inline double variance_function(double mu, Family family) {
  switch (family) {
    case Family::Bernoulli:
      if (!(mu > 0.0 && mu < 1.0)) {
        throw NumericError("bernoulli variance needs 0 < mu < 1 (got " +
                           std::to_string(mu) + ")");
      }
      return mu * (1.0 - mu);
    case Family::Poisson:
      if (!(mu > 0.0)) {
        throw NumericError("poisson variance needs mu > 0 (got " +
                           std::to_string(mu) + ")");
      }
      return mu;
    case Family::Gaussian:
      return 1.0;
  }
  throw ValidationError("invalid family");
}

// Everything needed to assess designs for one model: the regression
// parameters theta = (intercept, period effects, treatment effects,
// carryover effects), the response family with its canonical link, the
// layout (treatment and period counts) and the working correlation.
struct ModelSpec {
  Vector theta;
  Family family = Family::Gaussian;
  Link link = Link::Identity;
  int treatment_count = 0;
  int period_count = 0;
  CorrelationSpec correlation;

  int parameter_count() const {
    return xover::parameter_count(treatment_count, period_count);
  }

  void validate() const {
    if (treatment_count < 2) {
      throw ValidationError("model needs at least 2 treatments");
    }
    if (period_count < 2) {
      throw ValidationError("model needs at least 2 periods");
    }
    if (!is_canonical_pair(family, link)) {
      throw ValidationError("family '" + to_string(family) + "' with link '" +
                            to_string(link) +
                            "' is not a supported canonical pair");
    }
    if (theta.size() != parameter_count()) {
      throw ValidationError(
          "theta has " + std::to_string(theta.size()) + " entries, expected " +
          std::to_string(parameter_count()) + " (p + 2t - 2)");
    }
    if (!theta.allFinite()) {
      throw ValidationError("theta entries must be finite");
    }
    build_correlation(correlation, period_count);  // bounds on alpha
  }
};

inline Vector linear_predictor(const Matrix& x, const Vector& theta) {
  if (x.cols() != theta.size()) {
    throw ValidationError("design matrix has " + std::to_string(x.cols()) +
                          " columns but theta has " +
                          std::to_string(theta.size()) + " entries");
  }
  return x * theta;
}

// Per-period link quantities along one sequence: linear predictor eta,
// mean mu, derivative g = d mu / d eta and response variance d.
struct LinkEvaluation {
  Vector eta;
  Vector mu;
  Vector g_diag;
  Vector d_diag;
};

inline LinkEvaluation evaluate_link(const Matrix& x, const ModelSpec& spec) {
  LinkEvaluation out;
  out.eta = linear_predictor(x, spec.theta);
  const auto p = out.eta.size();
  out.mu.resize(p);
  out.g_diag.resize(p);
  out.d_diag.resize(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    out.mu(i) = inverse_link(out.eta(i), spec.link);
    out.g_diag(i) = inverse_link_derivative(out.eta(i), spec.link);
    out.d_diag(i) = variance_function(out.mu(i), spec.family);
    if (!std::isfinite(out.mu(i)) || !std::isfinite(out.g_diag(i)) ||
        !std::isfinite(out.d_diag(i))) {
      throw NumericError("link evaluation overflowed at eta = " +
                         std::to_string(out.eta(i)));
    }
    if (!(out.d_diag(i) > 0.0)) {
      throw NumericError("response variance underflowed to zero at eta = " +
                         std::to_string(out.eta(i)));
    }
  }
  return out;
}

}  // namespace xover
