#pragma once

// Independent reference computations used by the test binaries. Nothing here
// calls into the code under test except to obtain the quantity being checked.

#include "sdtm/basis.hpp"
#include "sdtm/types.hpp"

#include <complex>
#include <vector>

namespace oracle {

using sdtm::Matrix;
using sdtm::Vector;

/// Largest relative (Frobenius) mismatch between analytic basis derivatives
/// and central differences with step h. First derivatives difference the
/// values; second derivatives difference the analytic first derivatives.
double basis_derivative_error(const sdtm::RnbModel& model, const Matrix& points, double h = 1e-5);

/// Least squares through the normal equations (A^T A + lambda I) x = A^T b.
Matrix normal_equations(const Matrix& A, const Matrix& b, double lambda = 0.0);

/// O(n^2) DFT, X_j = sum_m x_m exp(-2 pi i j m / n).
std::vector<std::complex<double>> dft(const Vector& x);

/// |sum |x|^2 - (1/n) sum |X|^2| / sum |x|^2 for the brute-force DFT.
double parseval_defect(const Vector& x);

/// Spectral support of tanh(k sin x): largest |j| with |X_j|/n > eps, from the
/// brute-force DFT on n points.
int support_by_dft(double k, double eps, int n);

// Navier-Stokes manufactured solution on the unit square (nu = 1), written
// out independently of the library:
//   u1 =  sin(2 pi y) sin^2(pi x) sin t
//   u2 = -sin(2 pi x) sin^2(pi y) sin t
//   p  =  cos(pi x) sin(pi y) sin y
double ns_u1(double x, double y, double t);
double ns_u2(double x, double y, double t);
double ns_p(double x, double y);

/// Eighth-order central difference of f at s with step h (first or second derivative).
template <class F>
double d1(F&& f, double s, double h) {
  static const double c[] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
  double acc = 0.0;
  for (int j = 1; j <= 4; ++j) acc += c[j - 1] * (f(s + j * h) - f(s - j * h));
  return acc / h;
}

template <class F>
double d2(F&& f, double s, double h) {
  static const double c[] = {8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
  double acc = -205.0 / 72 * f(s);
  for (int j = 1; j <= 4; ++j) acc += c[j - 1] * (f(s + j * h) + f(s - j * h));
  return acc / (h * h);
}

/// Max over an n x n interior grid of |u_t + (u.grad)u - Laplacian(u) + grad p - f|,
/// derivatives by finite differences and f from the library.
double ns_momentum_residual(int n, double t);

/// Max |div u| of the manufactured velocity over an n x n grid, by finite differences.
double ns_divergence(int n, double t);

/// Max |Laplacian(p) - rhs| over an n x n grid, with Laplacian(p) by finite
/// differences and rhs from the library's Poisson right-hand side.
double ns_poisson_defect(int n, double t);

/// rel_l2 between the spectral Burgers reference at t = 1 computed with dt and dt/2.
double burgers_self_convergence(int n, double dt);

}  // namespace oracle
