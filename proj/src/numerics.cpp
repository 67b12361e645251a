#include "rsma/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "rsma/errors.hpp"

namespace rsma {

bool is_hermitian(const CMat& a, double tolerance) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tolerance * scale;
}

HermitianEig hermitian_eig(const CMat& a) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw ValidationError("hermitian_eig: matrix must be square and non-empty");
  }
  if (!a.allFinite()) throw NumericalError("hermitian_eig: non-finite entries");
  if (!is_hermitian(a)) throw ValidationError("hermitian_eig: matrix is not Hermitian");

  // Eigen reads only the lower triangle; symmetrize so rounding noise in the
  // upper triangle is not silently dropped.
  const CMat sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<CMat> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigensolver did not converge");
  }
  const Eigen::Index n = a.rows();
  HermitianEig out{Eigen::VectorXd(n), CMat(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {  // ascending -> descending
    out.values(j) = solver.eigenvalues()(n - 1 - j);
    out.vectors.col(j) = solver.eigenvectors().col(n - 1 - j);
  }
  return out;
}

CMat psd_project(const CMat& a) {
  const HermitianEig eig = hermitian_eig(a);
  const Eigen::VectorXd clipped = eig.values.cwiseMax(0.0);
  CMat out = eig.vectors * clipped.asDiagonal() * eig.vectors.adjoint();
  return 0.5 * (out + out.adjoint());
}

std::pair<double, CVec> dominant_eigenpair(const CMat& a) {
  HermitianEig eig = hermitian_eig(a);
  return {eig.values(0), eig.vectors.col(0)};
}

double fd_gradient_check(const ScalarField& f, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& analytic, double h) {
  if (analytic.size() != x.size()) {
    throw ValidationError("fd_gradient_check: gradient size mismatch");
  }
  if (!(h > 0.0)) throw ValidationError("fd_gradient_check: step must be positive");
  double worst = 0.0;
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe(i) = x(i) + h;
    const double plus = f(probe);
    probe(i) = x(i) - h;
    const double minus = f(probe);
    probe(i) = x(i);
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericalError("fd_gradient_check: non-finite function value at probe");
    }
    const double fd = (plus - minus) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - analytic(i)) / (std::abs(analytic(i)) + 1e-12));
  }
  return worst;
}

double soft_min(std::span<const double> values, double alpha) {
  if (values.empty()) throw ValidationError("soft_min: no values");
  if (!(alpha > 0.0)) throw ValidationError("soft_min: alpha must be positive");
  const double lo = *std::min_element(values.begin(), values.end());
  double acc = 0.0;
  for (double x : values) acc += std::exp(-(x - lo) / alpha);
  return lo - alpha * std::log(acc / static_cast<double>(values.size()));
}

Eigen::VectorXd soft_min_weights(std::span<const double> values, double alpha) {
  if (values.empty()) throw ValidationError("soft_min_weights: no values");
  const double lo = *std::min_element(values.begin(), values.end());
  Eigen::VectorXd w(static_cast<Eigen::Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) {
    w(static_cast<Eigen::Index>(k)) = std::exp(-(values[k] - lo) / alpha);
  }
  return w / w.sum();
}

double direction_distance(const CVec& a, const CVec& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return std::numeric_limits<double>::infinity();
  const cdouble inner = b.dot(a);  // b^H a
  const cdouble phase = std::abs(inner) > 0.0 ? inner / std::abs(inner) : cdouble(1.0);
  return (a / na - phase * b / nb).norm();
}

Eigen::VectorXd hermitian_to_real(const CMat& a) {
  const Eigen::Index n = a.rows();
  Eigen::VectorXd x(n * n);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) x(idx++) = a(i, i).real();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      x(idx++) = a(i, j).real();
      x(idx++) = a(i, j).imag();
    }
  }
  return x;
}

CMat real_to_hermitian(const Eigen::VectorXd& x, Eigen::Index dim) {
  if (x.size() != dim * dim) throw ValidationError("real_to_hermitian: size mismatch");
  CMat a(dim, dim);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < dim; ++i) a(i, i) = x(idx++);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i + 1; j < dim; ++j) {
      a(i, j) = cdouble(x(idx), x(idx + 1));
      a(j, i) = std::conj(a(i, j));
      idx += 2;
    }
  }
  return a;
}

Eigen::VectorXd hermitian_gradient_to_real(const CMat& g) {
  // A perturbation of the (i,j) real part moves both V_ij and V_ji.
  const Eigen::Index n = g.rows();
  Eigen::VectorXd x(n * n);
  Eigen::Index idx = 0;
  for (Eigen::Index i = 0; i < n; ++i) x(idx++) = g(i, i).real();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      x(idx++) = g(i, j).real() + g(j, i).real();
      x(idx++) = g(i, j).imag() - g(j, i).imag();
    }
  }
  return x;
}

}  // namespace rsma
