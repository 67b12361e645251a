#pragma once

#include <complex>
#include <functional>
#include <span>

#include <Eigen/Dense>

namespace rsma {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

namespace tol {
inline constexpr double kHermitian = 1e-10;
inline constexpr double kUnitModulus = 1e-9;
inline constexpr double kFeasible = 1e-9;
inline constexpr double kRankOne = 1e-4;
inline constexpr double kDykstra = 1e-8;
inline constexpr int kDykstraSweeps = 500;
}  // namespace tol

// Eigenvalues sorted descending; columns of `vectors` are the matching
// orthonormal eigenvectors.
struct HermitianEig {
  Eigen::VectorXd values;
  CMat vectors;
};

bool is_hermitian(const CMat& a, double tolerance = tol::kHermitian);

// Throws ValidationError for non-square or non-Hermitian input.
HermitianEig hermitian_eig(const CMat& a);

// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
CMat psd_project(const CMat& a);

// Largest eigenvalue of a Hermitian matrix and its eigenvector.
std::pair<double, CVec> dominant_eigenpair(const CMat& a);

using ScalarField = std::function<double(const Eigen::VectorXd&)>;

// Max over coordinates of |central difference - analytic| / (|analytic| + 1e-12).
double fd_gradient_check(const ScalarField& f, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& analytic, double h);

// -alpha * log(mean(exp(-x / alpha))), evaluated with the minimum factored out.
double soft_min(std::span<const double> values, double alpha);

// d soft_min / d x_k; nonnegative and summing to one.
Eigen::VectorXd soft_min_weights(std::span<const double> values, double alpha);

// ||a - e^{j phi} b|| minimized over phi, after normalizing both vectors.
double direction_distance(const CVec& a, const CVec& b);

// Hermitian matrices <-> real coordinates: diagonal entries, then real and
// imaginary parts of the strict upper triangle, row-major.
Eigen::VectorXd hermitian_to_real(const CMat& a);
CMat real_to_hermitian(const Eigen::VectorXd& x, Eigen::Index dim);

// Gradient of f(X) = Re tr(G^H X) expressed in the coordinates above.
Eigen::VectorXd hermitian_gradient_to_real(const CMat& g);

}  // namespace rsma
