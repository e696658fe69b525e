#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "chansel/cpsdm.hpp"
#include "chansel/rng.hpp"

using namespace chansel;

namespace {

Eigen::VectorXcd random_vector(int m, Rng& rng) {
  Eigen::VectorXcd v(m);
  for (int i = 0; i < m; ++i) v(i) = rng.circular_gaussian();
  return v;
}

Eigen::MatrixXcd random_hpd(int m, Rng& rng) {
  Eigen::MatrixXcd a(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a(i, j) = rng.circular_gaussian();
  return a * a.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(m, m);
}

}  // namespace

TEST_CASE("alpha 0 reduces the update to the instantaneous outer product") {
  Rng rng(1);
  Cpsdm cov(3, 2, 0.0);
  const Eigen::VectorXcd y = random_vector(3, rng);
  Eigen::MatrixXcd frame(3, 2);
  frame.col(0) = y;
  frame.col(1) = y;
  cov.update(frame);
  const Eigen::MatrixXcd expected = y * y.adjoint();
  CHECK((cov.matrix(0) - expected).norm() <= 1e-14 * expected.norm());
  CHECK(cov.frames_seen() == 1);
}

TEST_CASE("alpha 1 leaves the matrix unchanged") {
  Rng rng(2);
  Cpsdm cov(3, 1, 1.0, 0.5);
  const Eigen::MatrixXcd before = cov.matrix(0);
  Eigen::MatrixXcd frame(3, 1);
  frame.col(0) = random_vector(3, rng);
  cov.update(frame);
  CHECK((cov.matrix(0) - before).norm() == 0.0);
}

TEST_CASE("white-noise updates converge to the identity") {
  // Monte-Carlo fixed point of the recursion at the paper smoothing value.
  Rng rng(3);
  const int m = 4;
  Cpsdm cov(m, 1, 0.8465);
  Eigen::MatrixXcd frame(m, 1);
  for (int i = 0; i < 10000; ++i) {
    frame.col(0) = random_vector(m, rng);
    cov.update(frame);
  }
  const Eigen::MatrixXcd& C = cov.matrix(0);
  for (int i = 0; i < m; ++i) {
    CHECK(C(i, i).real() == doctest::Approx(1.0).epsilon(0.25));
    CHECK(C(i, i).imag() == doctest::Approx(0.0));
    for (int j = 0; j < m; ++j)
      if (i != j) CHECK(std::abs(C(i, j)) < 0.05);
  }
}

TEST_CASE("updates preserve Hermitian symmetry and positive semidefiniteness") {
  Rng rng(4);
  const int m = 4;
  Cpsdm cov(m, 1, 0.9);
  Eigen::MatrixXcd frame(m, 1);
  for (int i = 0; i < 200; ++i) {
    frame.col(0) = random_vector(m, rng) * rng.uniform(0.0, 10.0);
    cov.update(frame);
    const Eigen::MatrixXcd& C = cov.matrix(0);
    CHECK((C - C.adjoint()).norm() <= 1e-12 * std::max(C.norm(), 1.0));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(C);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10 * C.trace().real());
  }
}

TEST_CASE("constant outer product is approached geometrically with ratio alpha") {
  Rng rng(5);
  const double alpha = 0.8465;
  Cpsdm cov(2, 1, alpha, 1e-6);
  const Eigen::VectorXcd y = random_vector(2, rng);
  const Eigen::MatrixXcd target = y * y.adjoint();
  Eigen::MatrixXcd frame(2, 1);
  frame.col(0) = y;

  double prev_err = (cov.matrix(0) - target).norm();
  for (int i = 0; i < 30; ++i) {
    cov.update(frame);
    const double err = (cov.matrix(0) - target).norm();
    CHECK(err == doctest::Approx(prev_err * alpha).epsilon(1e-9));
    prev_err = err;
  }
}

TEST_CASE("warmup frame count follows the smoothing constant") {
  CHECK(Cpsdm(2, 1, 0.8465).warmup_frames() == 20);
  CHECK(Cpsdm(2, 1, 0.0).warmup_frames() == 3);
}

TEST_CASE("dimension mismatches are rejected") {
  Cpsdm cov(3, 2, 0.5);
  CHECK_THROWS_AS(cov.update(Eigen::MatrixXcd::Zero(2, 2)), std::invalid_argument);
}

TEST_CASE("hermitian solve: identity, diagonal, and residual checks") {
  Eigen::VectorXcd b(2);
  b << cdouble(1.0, 0.0), cdouble(1.0, 0.0);

  const Eigen::VectorXcd x_id = solve_hermitian(Eigen::MatrixXcd::Identity(2, 2), b, 0.0);
  CHECK((x_id - b).norm() <= 1e-15);

  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(2, 2);
  diag(0, 0) = 4.0;
  diag(1, 1) = 1.0;
  const Eigen::VectorXcd x_diag = solve_hermitian(diag, b, 0.0);
  CHECK(x_diag(0).real() == doctest::Approx(0.25));
  CHECK(x_diag(1).real() == doctest::Approx(1.0));

  Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXcd C = random_hpd(4, rng);
    const Eigen::VectorXcd rhs = random_vector(4, rng);
    const Eigen::VectorXcd x = solve_hermitian(C, rhs, 0.0);
    CHECK((C * x - rhs).norm() / rhs.norm() <= 1e-10);
  }
}

TEST_CASE("diagonal loading regularizes a singular matrix") {
  // Rank-one matrix: unsolvable at loading 0 unless b lies in the range;
  // with loading the solve goes through.
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(2, 2);
  C(0, 0) = 1.0;
  Eigen::VectorXcd b(2);
  b << cdouble(1.0, 0.0), cdouble(1.0, 0.0);
  const Eigen::VectorXcd x = solve_hermitian(C, b, 1e-6);
  CHECK(x.allFinite());
  // (C + load*tr/M I) x = b exactly.
  const Eigen::MatrixXcd A = C + 1e-6 * 0.5 * Eigen::MatrixXcd::Identity(2, 2);
  CHECK((A * x - b).norm() / b.norm() <= 1e-10);
}
