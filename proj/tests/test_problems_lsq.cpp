#include "doctest.h"

#include "support/oracles.hpp"

#include "sdtm/lsq.hpp"
#include "sdtm/problems.hpp"

using namespace sdtm;

namespace {

FieldWithDerivs field_1d(const Vector& u, const Vector& ux, const Vector& uxx) {
  FieldWithDerivs f;
  f.u = u;
  f.du = {Matrix(ux)};
  f.d2u = {Matrix(uxx)};
  return f;
}

Matrix grid2d(int n) {
  Matrix p(static_cast<long>(n) * n, 2);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p.row(static_cast<long>(i) * n + j) << (i + 0.5) / n, (j + 0.5) / n;
  return p;
}

}  // namespace

TEST_CASE("operators") {
  Vector x = Vector::LinSpaced(9, -1, 1);
  SUBCASE("advection of u = x is -1") {
    const PdeProblem p = make_problem("advection1d");
    const Matrix F = apply_operator(p, field_1d(x, Vector::Ones(9), Vector::Zero(9)));
    CHECK((F.array() == -1.0).all());
  }
  SUBCASE("Burgers of sin(pi x) vanishes at x = 0") {
    const PdeProblem p = make_problem("burgers1d");
    Vector s(1), sx(1), sxx(1);
    s << std::sin(0.0);
    sx << M_PI * std::cos(0.0);
    sxx << -M_PI * M_PI * std::sin(0.0);
    CHECK(apply_operator(p, field_1d(s, sx, sxx))(0, 0) == 0.0);
  }
  SUBCASE("Allen-Cahn of a constant is c - c^3") {
    const PdeProblem p = make_problem("ac1d-wave");
    for (double c : {-1.0, 0.0, 0.3, 1.0}) {
      Vector u = Vector::Constant(3, c);
      const Matrix F = apply_operator(p, field_1d(u, Vector::Zero(3), Vector::Zero(3)));
      CHECK(F(1, 0) == doctest::Approx(c - c * c * c).epsilon(1e-15));
    }
  }
  SUBCASE("linear operators act column by column") {
    const PdeProblem p = make_problem("advection1d");
    FieldWithDerivs f;
    f.u = Matrix::Random(5, 3);
    f.du = {Matrix::Random(5, 3)};
    const Matrix F = apply_operator(p, f);
    CHECK((F + f.du[0]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("initial and exact data") {
  SUBCASE("advection exact at t = 0 equals the initial condition") {
    const PdeProblem p = make_problem("advection1d");
    const Matrix x = Vector::LinSpaced(11, -1, 1);
    CHECK(exact_solution(p, x, 0.0) == p.initial(x, 0.0));
    CHECK(exact_solution(p, x, 0.0)(3, 0) == doctest::Approx(std::sin(5 * M_PI * x(3, 0))));
  }
  SUBCASE("Allen-Cahn wave centre is 1/2") {
    const PdeProblem p = make_problem("ac1d-wave");
    const double t = 0.4;
    const double s = 3 * p.params.epsilon / std::sqrt(2.0);
    Matrix x(1, 1);
    x << s * t;
    CHECK(exact_solution(p, x, t)(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("Navier-Stokes velocity vanishes at t = 0") {
    const PdeProblem p = make_problem("ns2d");
    const Matrix e = exact_solution(p, grid2d(8), 0.0);
    CHECK(e.leftCols(2).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("no exact solution for Burgers") {
    CHECK_THROWS_AS(exact_solution(make_problem("burgers1d"), Matrix::Zero(2, 1), 0.0), NotAvailableError);
  }
  SUBCASE("unknown problem name") { CHECK_THROWS(make_problem("kdv")); }
}

TEST_CASE("Navier-Stokes forcing and pressure equation") {
  const Matrix pts = grid2d(16);
  SUBCASE("at t = 0 the forcing is u_t + grad p") {
    const NsExactFields e = ns_exact_fields(pts, 0.0);
    CHECK((ns_forcing(pts, 0.0, 1.0) - (e.velocity_t + e.pressure_grad)).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("exact fields agree with the independent formulas") {
    const NsExactFields e = ns_exact_fields(pts, 0.9);
    for (long i = 0; i < pts.rows(); ++i) {
      CHECK(e.velocity(i, 0) == doctest::Approx(oracle::ns_u1(pts(i, 0), pts(i, 1), 0.9)).epsilon(1e-14));
      CHECK(e.velocity(i, 1) == doctest::Approx(oracle::ns_u2(pts(i, 0), pts(i, 1), 0.9)).epsilon(1e-14));
      CHECK(e.pressure(i, 0) == doctest::Approx(oracle::ns_p(pts(i, 0), pts(i, 1))).epsilon(1e-14));
    }
  }
  SUBCASE("shear flow u = (y, x) gives rhs -2") {
    FieldWithDerivs v;
    v.u.resize(pts.rows(), 2);
    v.u << pts.col(1), pts.col(0);
    v.du = {Matrix::Zero(pts.rows(), 2), Matrix::Zero(pts.rows(), 2)};
    v.du[0].col(1).setOnes();  // u2_x
    v.du[1].col(0).setOnes();  // u1_y
    const Vector rhs = pressure_poisson_rhs(v, Vector::Zero(pts.rows()));
    CHECK((rhs.array() == -2.0).all());
  }
  SUBCASE("zero velocity gives rhs = div f") {
    FieldWithDerivs v;
    v.u = Matrix::Zero(4, 2);
    v.du = {Matrix::Zero(4, 2), Matrix::Zero(4, 2)};
    Vector fdiv(4);
    fdiv << 1, -2, 3, 0.5;
    CHECK(pressure_poisson_rhs(v, fdiv) == fdiv);
  }
  SUBCASE("substitution oracles") {
    CHECK(oracle::ns_momentum_residual(64, 0.3) <= 1e-10);
    CHECK(oracle::ns_divergence(64, 0.3) <= 1e-12);
    CHECK(oracle::ns_poisson_defect(64, 1.0) <= 1e-8);
  }
}

TEST_CASE("error metrics") {
  Matrix r(3, 1);
  r << 1, -2, 2;
  CHECK(rel_l2(r, r) == 0.0);
  CHECK(linf(r, r) == 0.0);
  CHECK(rel_l2(2 * r, r) == doctest::Approx(1.0));
  CHECK(linf((r.array() + 0.25).matrix(), r) == doctest::Approx(0.25));
  CHECK_THROWS(rel_l2(r, Matrix::Zero(3, 1)));
  CHECK_THROWS(rel_l2(r, Matrix::Zero(2, 1)));
}

TEST_CASE("design assembly") {
  const Matrix A = Matrix::Random(20, 6);
  const Matrix B = Matrix::Random(4, 6);
  SUBCASE("lambda_bc = 0 drops the boundary block") {
    const LsqSystem s = assemble_design(A, B, 0.0, 0.0);
    CHECK(s.boundary_rows == 0);
    CHECK(s.rows() == 20);
  }
  SUBCASE("row scaling") {
    const LsqSystem s = assemble_design(A, B, 4.0, 1e-2);
    CHECK(s.rows() == 30);
    CHECK((s.design.topRows(20) - A / std::sqrt(20.0)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((s.design.middleRows(20, 4) - B * std::sqrt(4.0 / 4)).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((s.design.bottomRows(6) - 0.1 * Matrix::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-15);
  }
  SUBCASE("hard periodic model needs only interior and ridge rows") {
    FourierFeatureMap fm{IntMatrix::Ones(1, 1), {2.0}};
    const int w[] = {1, 2, 10, 1};
    const RnbModel m = init_rnb(w, 1.0, fm, std::nullopt, 1);
    const Matrix x = Vector::LinSpaced(15, -1, 0.9);
    const BasisEvaluation ev = evaluate_basis(m, x, 0);
    const LsqSystem s = assemble_design(ev, nullptr, BoundaryRowKind::None, 1.0, 1e-6);
    const LsqSystem ref = assemble_design(with_bias_column(ev.values), Matrix(0, 11), 1.0, 1e-6);
    CHECK(s.design == ref.design);
  }
}

TEST_CASE("least-squares solve") {
  SUBCASE("identity") {
    const LsqSystem s = assemble_design(Matrix::Identity(3, 3), Matrix(0, 3), 0.0, 0.0);
    Matrix b(3, 1);
    b << 1, 2, 3;
    const Matrix theta = solve_coefficients(factorize(s), stack_rhs(s, b, Matrix()));
    CHECK((theta - b).cwiseAbs().maxCoeff() <= 1e-14);
  }
  SUBCASE("square invertible system interpolates") {
    const Matrix A = Matrix::Random(8, 8) + 4 * Matrix::Identity(8, 8);
    const Matrix b = Matrix::Random(8, 1);
    const LsqSystem s = assemble_design(A, Matrix(0, 8), 0.0, 0.0);
    const Matrix theta = solve_coefficients(factorize(s), stack_rhs(s, b, Matrix()));
    CHECK((A * theta - b).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("target in the span has zero residual") {
    const Matrix A = Matrix::Random(30, 5);
    const Matrix b = A * Matrix::Random(5, 1);
    const LsqSystem s = assemble_design(A, Matrix(0, 5), 0.0, 0.0);
    CHECK(solve(factorize(s), stack_rhs(s, b, Matrix())).residual_norm <= 1e-13);
  }
  SUBCASE("zero rhs gives zero coefficients") {
    const LsqSystem s = assemble_design(Matrix::Random(10, 20), Matrix(0, 20), 0.0, 1e-8);
    CHECK(solve_coefficients(factorize(s), Matrix::Zero(s.rows(), 1)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("repeated solves are bitwise identical") {
    const LsqSystem s = assemble_design(Matrix::Random(40, 7), Matrix(0, 7), 0.0, 1e-10);
    const QrCache c = factorize(s);
    const Matrix rhs = Matrix::Random(s.rows(), 2);
    CHECK(solve_coefficients(c, rhs) == solve_coefficients(c, rhs));
  }
  SUBCASE("random overdetermined system against the normal equations") {
    const Matrix A = Matrix::Random(50, 10);
    const Matrix b = Matrix::Random(50, 1);
    const LsqSystem s = assemble_design(A, Matrix(0, 10), 0.0, 0.0);
    const Matrix theta = solve_coefficients(factorize(s), stack_rhs(s, b, Matrix()));
    const Matrix ref = oracle::normal_equations(A, b);
    CHECK((theta - ref).norm() / ref.norm() <= 1e-8);
  }
}

TEST_CASE("fingerprints distinguish configurations") {
  const int w[] = {1, 10, 1};
  const RnbModel m = init_rnb(w, 1.0, std::nullopt, std::nullopt, 1);
  const Matrix x = Vector::LinSpaced(5, 0, 1);
  const auto a = fingerprint_of(m, x, Matrix(0, 1), "a");
  CHECK(a == fingerprint_of(m, x, Matrix(0, 1), "a"));
  CHECK(a != fingerprint_of(m, x, Matrix(0, 1), "b"));
  CHECK(a != fingerprint_of(init_rnb(w, 1.0, std::nullopt, std::nullopt, 2), x, Matrix(0, 1), "a"));
}
