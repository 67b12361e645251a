#include <doctest.h>

#include <cmath>
#include <vector>

#include "rsma/errors.hpp"
#include "rsma/numerics.hpp"
#include "rsma/rng.hpp"

using namespace rsma;

namespace {

CMat random_hermitian(int n, Rng& rng) {
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.complex_normal();
  return 0.5 * (a + a.adjoint());
}

CMat random_psd(int n, Rng& rng) {
  CMat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = rng.complex_normal();
  // Random rank keeps some competitors on the boundary of the cone.
  const int rank = rng.uniform_int(1, n);
  return a.leftCols(rank) * a.leftCols(rank).adjoint();
}

}  // namespace

TEST_CASE("hermitian_eig on identity and diagonal inputs") {
  const HermitianEig id = hermitian_eig(CMat::Identity(3, 3));
  CHECK((id.values - Eigen::VectorXd::Ones(3)).norm() < 1e-12);

  CMat d = CMat::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = -1.0;
  const HermitianEig e = hermitian_eig(d);
  CHECK(e.values(0) == doctest::Approx(2.0));
  CHECK(e.values(1) == doctest::Approx(-1.0));
  CHECK(std::abs(e.vectors(0, 0)) == doctest::Approx(1.0));
  CHECK(std::abs(e.vectors(1, 1)) == doctest::Approx(1.0));
}

TEST_CASE("hermitian_eig reconstructs random matrices up to dimension 64") {
  Rng rng(11);
  for (int n : {1, 5, 17, 64}) {
    const CMat a = random_hermitian(n, rng);
    const HermitianEig e = hermitian_eig(a);
    const CMat back = e.vectors * e.values.cast<cdouble>().asDiagonal() * e.vectors.adjoint();
    CHECK((back - a).norm() / a.norm() < 1e-8);
    for (Eigen::Index i = 1; i < e.values.size(); ++i) CHECK(e.values(i - 1) >= e.values(i));
  }
}

TEST_CASE("hermitian_eig rejects bad input") {
  CHECK_THROWS_AS(hermitian_eig(CMat::Zero(2, 3)), ValidationError);
  CMat a = CMat::Identity(2, 2);
  a(0, 1) = 1.0;
  CHECK_THROWS_AS(hermitian_eig(a), ValidationError);
}

TEST_CASE("psd_project fixes PSD inputs and clips negative eigenvalues") {
  Rng rng(3);
  const CMat p = random_psd(5, rng);
  CHECK((psd_project(p) - p).norm() < 1e-10 * (1.0 + p.norm()));

  CMat d = CMat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -2.0;
  CMat want = CMat::Zero(2, 2);
  want(0, 0) = 1.0;
  CHECK((psd_project(d) - want).norm() < 1e-12);
}

TEST_CASE("psd_project beats random PSD competitors") {
  Rng rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const CMat a = random_hermitian(4, rng);
    const CMat p = psd_project(a);
    CHECK(hermitian_eig(p).values.minCoeff() >= -1e-10);
    const double dist = (p - a).norm();
    for (int c = 0; c < 100; ++c) CHECK(dist <= (random_psd(4, rng) - a).norm() + 1e-12);
  }
}

TEST_CASE("dominant_eigenpair") {
  Rng rng(8);
  const CMat a = random_hermitian(6, rng);
  const auto [value, vec] = dominant_eigenpair(a);
  CHECK(value == doctest::Approx(hermitian_eig(a).values(0)));
  CHECK((a * vec - value * vec).norm() < 1e-9);
}

TEST_CASE("fd_gradient_check on a quadratic") {
  Rng rng(1);
  Eigen::VectorXd x(6);
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.normal();
  const ScalarField f = [](const Eigen::VectorXd& y) { return y.squaredNorm(); };
  CHECK(fd_gradient_check(f, x, 2.0 * x, 1e-5) < 1e-6);
  CHECK(fd_gradient_check(f, x, 3.0 * x, 1e-5) > 0.1);
}

TEST_CASE("soft_min bounds and weights") {
  const std::vector<double> same{2.5, 2.5, 2.5};
  CHECK(soft_min(same, 0.1) == doctest::Approx(2.5).epsilon(1e-14));

  const std::vector<double> spread{1.0, 4.0, 2.0, 7.0};
  const double alpha = 1e-3;
  const double s = soft_min(spread, alpha);
  // The mean inside the log puts the value between min and min + alpha log K.
  CHECK(s >= 1.0 - 1e-12);
  CHECK(s <= 1.0 + alpha * std::log(4.0) + 1e-12);

  const std::vector<double> big{1000.0, 1001.0};
  CHECK(std::isfinite(soft_min(big, 1e-4)));

  const Eigen::VectorXd w = soft_min_weights(spread, 0.5);
  CHECK(w.sum() == doctest::Approx(1.0));
  CHECK(w.minCoeff() >= 0.0);
  // Weights are the gradient.
  for (std::size_t k = 0; k < spread.size(); ++k) {
    std::vector<double> up = spread;
    std::vector<double> dn = spread;
    up[k] += 1e-6;
    dn[k] -= 1e-6;
    CHECK((soft_min(up, 0.5) - soft_min(dn, 0.5)) / 2e-6 == doctest::Approx(w(static_cast<Eigen::Index>(k))).epsilon(1e-6));
  }
}

TEST_CASE("direction_distance ignores phase and scale") {
  Rng rng(4);
  CVec a(3);
  for (int i = 0; i < 3; ++i) a(i) = rng.complex_normal();
  CHECK(direction_distance(a, 3.0 * std::polar(1.0, 0.7) * a) < 1e-12);
  CVec b = a;
  b(0) += 1.0;
  CHECK(direction_distance(a, b) > 1e-3);
}

TEST_CASE("hermitian coordinates round trip and gradient mapping") {
  Rng rng(9);
  const CMat a = random_hermitian(4, rng);
  const Eigen::VectorXd x = hermitian_to_real(a);
  CHECK(x.size() == 16);
  CHECK((real_to_hermitian(x, 4) - a).norm() < 1e-14);

  const CMat g = random_hermitian(4, rng);
  const ScalarField f = [&](const Eigen::VectorXd& y) { return (g.adjoint() * real_to_hermitian(y, 4)).trace().real(); };
  CHECK(fd_gradient_check(f, x, hermitian_gradient_to_real(g), 1e-5) < 1e-7);
}
