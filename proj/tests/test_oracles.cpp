// Oracle checks that the rest of the suite relies on. Registered first in ctest.

#include "doctest.h"

#include "support/oracles.hpp"

#include "sdtm/adaptive.hpp"
#include "sdtm/basis.hpp"
#include "sdtm/geometry.hpp"
#include "sdtm/lsq.hpp"

#include <random>

using namespace sdtm;

namespace {

Matrix random_points(long n, int dim, double lo, double hi, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix p(n, dim);
  for (long i = 0; i < n; ++i)
    for (int d = 0; d < dim; ++d) p(i, d) = u(rng);
  return p;
}

Matrix random_matrix(long r, long c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix m(r, c);
  for (long i = 0; i < r; ++i)
    for (long j = 0; j < c; ++j) m(i, j) = g(rng);
  return m;
}

}  // namespace

TEST_CASE("basis derivatives agree with central differences") {
  SUBCASE("1D periodic Fourier layer") {
    FourierFeatureMap fm{IntMatrix::Ones(1, 1), {2.0}};
    const int w[] = {1, 2, 40, 1};
    const RnbModel m = init_rnb(w, 3.0, fm, std::nullopt, 11);
    CHECK(oracle::basis_derivative_error(m, random_points(30, 1, -1, 1, 1)) <= 1e-6);
  }
  SUBCASE("1D two multipliers, multi-scale") {
    IntMatrix b(2, 1);
    b << 1, 2;
    FourierFeatureMap fm{b, {2.0}};
    const int w[] = {1, 4, 60, 1};
    const RnbModel m = init_rnb(w, 2.0, fm, make_msrnb_scales(60, 3), 5);
    CHECK(oracle::basis_derivative_error(m, random_points(30, 1, -1, 1, 2)) <= 1e-6);
  }
  SUBCASE("2D plain tanh layer") {
    const int w[] = {2, 50, 2};
    const RnbModel m = init_rnb(w, 1.5, std::nullopt, std::nullopt, 7);
    CHECK(oracle::basis_derivative_error(m, random_points(40, 2, 0, 1, 3)) <= 1e-6);
  }
  SUBCASE("2D Fourier layer") {
    IntMatrix b(4, 2);
    b << 1, 0, 0, 1, 2, 0, 0, 2;
    FourierFeatureMap fm{b, {2.0, 2.0}};
    const int w[] = {2, 8, 50, 1};
    const RnbModel m = init_rnb(w, 1.0, fm, std::nullopt, 9);
    CHECK(oracle::basis_derivative_error(m, random_points(40, 2, -1, 1, 4)) <= 1e-6);
  }
}

TEST_CASE("least squares agrees with the normal equations") {
  const Matrix A = random_matrix(50, 10, 21);
  const Matrix b = random_matrix(50, 2, 22);
  SUBCASE("unregularized") {
    const LsqSystem sys = assemble_design(A, Matrix(0, 10), 0.0, 0.0);
    const Matrix theta = solve_coefficients(factorize(sys), stack_rhs(sys, b, Matrix()));
    const Matrix ref = oracle::normal_equations(A, b);
    CHECK((theta - ref).norm() / ref.norm() <= 1e-8);
  }
  SUBCASE("ridge") {
    const double lambda = 1e-3;
    const LsqSystem sys = assemble_design(A, Matrix(0, 10), 0.0, lambda);
    const Matrix theta = solve_coefficients(factorize(sys), stack_rhs(sys, b, Matrix()));
    const double s = std::sqrt(1.0 / 50);
    const Matrix ref = oracle::normal_equations(s * A, s * b, lambda);
    CHECK((theta - ref).norm() / ref.norm() <= 1e-8);
  }
}

TEST_CASE("Parseval identity for the brute-force DFT") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  Vector x(257);
  for (auto& v : x) v = g(rng);
  CHECK(oracle::parseval_defect(x) <= 1e-10);
}

TEST_CASE("library spectrum matches the brute-force DFT") {
  const int n = 256;
  Vector x(n);
  for (int m = 0; m < n; ++m) x[m] = std::sin(2 * M_PI * 3 * m / n) + 0.3 * std::cos(2 * M_PI * 17 * m / n) + 0.2;
  const SpectrumAnalysis s = spectrum_of_samples(x);
  const auto X = oracle::dft(x);
  REQUIRE(static_cast<int>(s.indices.size()) == n);
  double worst = 0.0;
  for (int j = 0; j < n; ++j) {
    const int idx = s.indices[j];
    const int bin = idx >= 0 ? idx : n + idx;
    worst = std::max(worst, std::abs(s.magnitudes(j, 0) - std::abs(X[bin]) / n));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("frequency support matches the brute-force DFT") {
  for (double k : {1.0, 3.0, 10.0}) {
    CAPTURE(k);
    CHECK(frequency_support_at(k, 1e-8, 512) == oracle::support_by_dft(k, 1e-8, 512));
  }
}

TEST_CASE("Navier-Stokes manufactured solution: substitution oracles") {
  CHECK(oracle::ns_momentum_residual(64, 0.7) <= 1e-10);
  CHECK(oracle::ns_momentum_residual(64, 0.0) <= 1e-10);
  CHECK(oracle::ns_divergence(64, 0.7) <= 1e-12);
  CHECK(oracle::ns_poisson_defect(64, 1.0) <= 1e-8);
}

TEST_CASE("spectral Burgers reference is self-convergent in dt") {
  CHECK(oracle::burgers_self_convergence(4096, 1e-4) <= 1e-8);
}
