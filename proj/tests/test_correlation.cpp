#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "xover/working_correlation.hpp"

using Catch::Matchers::WithinAbs;
using xover::CorrelationSpec;
using xover::CorrelationStructure;
using xover::Matrix;
using xover::NumericError;
using xover::ValidationError;

TEST_CASE("ar1 correlation matrix entries") {
  const Matrix c =
      xover::build_correlation({CorrelationStructure::AR1, 0.1}, 2);
  Matrix expected(2, 2);
  expected << 1.0, 0.1, 0.1, 1.0;
  CHECK((c - expected).cwiseAbs().maxCoeff() == 0.0);

  const Matrix c4 =
      xover::build_correlation({CorrelationStructure::AR1, 0.5}, 4);
  CHECK_THAT(c4(0, 3), WithinAbs(0.125, 1e-15));
  CHECK_THAT(c4(1, 3), WithinAbs(0.25, 1e-15));
  CHECK(c4.diagonal().isOnes(0.0));
}

TEST_CASE("compound symmetry correlation matrix entries") {
  const Matrix c = xover::build_correlation(
      {CorrelationStructure::CompoundSymmetry, 0.3}, 3);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(c(i, j) == (i == j ? 1.0 : 0.3));
    }
  }
}

TEST_CASE("independence ignores alpha") {
  const Matrix c = xover::build_correlation(
      {CorrelationStructure::Independence, 0.9}, 3);
  CHECK(c == Matrix::Identity(3, 3));
}

TEST_CASE("alpha range validation") {
  CHECK_THROWS_AS(
      xover::build_correlation({CorrelationStructure::AR1, 1.0}, 2),
      ValidationError);
  CHECK_THROWS_AS(
      xover::build_correlation({CorrelationStructure::AR1, -1.0}, 2),
      ValidationError);
  // Compound symmetry needs alpha above -1/(p-1).
  CHECK_THROWS_AS(
      xover::build_correlation({CorrelationStructure::CompoundSymmetry, -0.5},
                               3),
      ValidationError);
  CHECK_NOTHROW(
      xover::build_correlation({CorrelationStructure::CompoundSymmetry, -0.4},
                               3));
}

TEST_CASE("in-range correlation matrices are positive definite") {
  for (double alpha : {-0.99, -0.5, 0.0, 0.5, 0.99}) {
    const Matrix c =
        xover::build_correlation({CorrelationStructure::AR1, alpha}, 5);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
  for (double alpha : {-0.24, 0.0, 0.5, 0.99}) {
    const Matrix c = xover::build_correlation(
        {CorrelationStructure::CompoundSymmetry, alpha}, 5);
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("factor of the identity is the identity") {
  const auto factor = xover::factor_inverse(Matrix::Identity(3, 3));
  CHECK((factor.r - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("factor reproduces the closed-form 2x2 inverse") {
  Matrix c(2, 2);
  c << 1.0, 0.1, 0.1, 1.0;
  const auto factor = xover::factor_inverse(c);
  const Matrix rtr = factor.r.transpose() * factor.r;
  Matrix expected(2, 2);
  expected << 1.0, -0.1, -0.1, 1.0;
  expected /= 0.99;
  CHECK((rtr - expected).cwiseAbs().maxCoeff() < 1e-12);
  // Upper triangular by construction.
  CHECK(factor.r(1, 0) == 0.0);
}

TEST_CASE("factor residual is tight for every structure") {
  for (int p : {2, 3, 4, 6}) {
    for (double alpha : {0.0, 0.1, 0.5, 0.9}) {
      const auto factor =
          xover::factor_inverse({CorrelationStructure::AR1, alpha}, p);
      const double residual =
          (factor.r.transpose() * factor.r * factor.c -
           Matrix::Identity(p, p))
              .cwiseAbs()
              .maxCoeff();
      CHECK(residual < 1e-10);
    }
  }
}

TEST_CASE("factor rejects non positive definite input") {
  Matrix bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;
  CHECK_THROWS_AS(xover::factor_inverse(bad), NumericError);
}

TEST_CASE("structure names round-trip") {
  for (CorrelationStructure s :
       {CorrelationStructure::AR1, CorrelationStructure::CompoundSymmetry,
        CorrelationStructure::Independence}) {
    CHECK(xover::correlation_structure_from_string(xover::to_string(s)) == s);
  }
  CHECK_THROWS_AS(xover::correlation_structure_from_string("toeplitz"),
                  ValidationError);
}
