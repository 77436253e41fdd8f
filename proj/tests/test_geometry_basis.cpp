#include "doctest.h"

#include "sdtm/basis.hpp"
#include "sdtm/geometry.hpp"
#include "sdtm/lsq.hpp"

#include <set>
#include <sstream>

using namespace sdtm;

TEST_CASE("uniform grid") {
  SUBCASE("1D with endpoints") {
    const int c[] = {5};
    const Matrix g = uniform_grid(Domain({-1.0}, {1.0}), c);
    REQUIRE(g.rows() == 5);
    const double want[] = {-1, -0.5, 0, 0.5, 1};
    for (int i = 0; i < 5; ++i) CHECK(g(i, 0) == want[i]);
  }
  SUBCASE("2D corners") {
    const int c[] = {2, 2};
    const Matrix g = uniform_grid(Domain({0.0, 0.0}, {1.0, 1.0}), c);
    REQUIRE(g.rows() == 4);
    std::set<std::pair<double, double>> pts;
    for (int i = 0; i < 4; ++i) pts.insert({g(i, 0), g(i, 1)});
    CHECK(pts == std::set<std::pair<double, double>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  }
  SUBCASE("4097 points on [-1, 1]") {
    const int c[] = {4097};
    const Matrix g = uniform_grid(Domain({-1.0}, {1.0}), c);
    for (long i = 1; i < g.rows(); ++i) CHECK(g(i, 0) - g(i - 1, 0) == 2.0 / 4096);
  }
  SUBCASE("rejects fewer than two points per axis") {
    const int c[] = {1};
    CHECK_THROWS(uniform_grid(Domain({0.0}, {1.0}), c));
  }
}

TEST_CASE("latin hypercube sampling") {
  const Domain d({0.0, 0.0}, {1.0, 1.0});
  SUBCASE("one point per stratum") {
    const Matrix p = lhs_sample(d, 4, 3);
    for (int axis = 0; axis < 2; ++axis) {
      int bins[4] = {0, 0, 0, 0};
      for (long i = 0; i < 4; ++i) ++bins[std::min(3, static_cast<int>(p(i, axis) * 4))];
      for (int b : bins) CHECK(b == 1);
    }
  }
  SUBCASE("deterministic per seed") {
    CHECK(lhs_sample(d, 50, 9) == lhs_sample(d, 50, 9));
    CHECK(lhs_sample(d, 50, 9) != lhs_sample(d, 50, 10));
  }
  SUBCASE("stays inside the box") {
    const Domain r({-1.0, 0.0}, {1.0, 1.0});
    const Matrix p = lhs_sample(r, 1000, 1);
    CHECK(p.col(0).minCoeff() >= -1.0);
    CHECK(p.col(0).maxCoeff() <= 1.0);
    CHECK(p.col(1).minCoeff() >= 0.0);
    CHECK(p.col(1).maxCoeff() <= 1.0);
  }
}

TEST_CASE("boundary sampling") {
  SUBCASE("1D gives both ends") {
    const Matrix b = boundary_sample(Domain({-1.0}, {1.0}), 1, 0);
    REQUIRE(b.rows() == 2);
    CHECK(b(0, 0) == -1.0);
    CHECK(b(1, 0) == 1.0);
  }
  SUBCASE("2D points lie on the faces") {
    const Matrix b = boundary_sample(Domain({0.0, 0.0}, {1.0, 1.0}), 10, 4);
    CHECK(b.rows() == 40);
    for (long i = 0; i < b.rows(); ++i) {
      const double dist = std::min({b(i, 0), 1 - b(i, 0), b(i, 1), 1 - b(i, 1)});
      CHECK(dist == 0.0);
    }
  }
  SUBCASE("lo/hi faces are periodic partners") {
    const Matrix b = boundary_sample(Domain({0.0, 0.0}, {1.0, 1.0}), 6, 2);
    for (int j = 0; j < 6; ++j) {
      CHECK(b(j, 0) == 0.0);
      CHECK(b(6 + j, 0) == 1.0);
      CHECK(b(j, 1) == b(6 + j, 1));
    }
  }
}

TEST_CASE("random neural basis initialization") {
  FourierFeatureMap fm{IntMatrix::Ones(1, 1), {2.0}};
  const int w[] = {1, 2, 100, 1};
  SUBCASE("weights bounded by r") {
    const RnbModel m = init_rnb(w, 0.5, fm, std::nullopt, 1);
    for (const auto& l : m.hidden.layers) CHECK(l.weight.cwiseAbs().maxCoeff() <= 0.5);
  }
  SUBCASE("reproducible per seed") {
    CHECK(same_hidden_parameters(init_rnb(w, 1.0, fm, std::nullopt, 4), init_rnb(w, 1.0, fm, std::nullopt, 4)));
    CHECK_FALSE(same_hidden_parameters(init_rnb(w, 1.0, fm, std::nullopt, 4), init_rnb(w, 1.0, fm, std::nullopt, 5)));
  }
  SUBCASE("widths [1,2,100,1] with one Fourier pair") {
    const RnbModel m = init_rnb(w, 1.0, fm, std::nullopt, 0);
    CHECK(m.basis_count() == 100);
    CHECK(m.feature_map->output_dim() == 2);
    CHECK(m.out_dim() == 1);
  }
  SUBCASE("feature width must match the map") {
    const int bad[] = {1, 4, 100, 1};
    CHECK_THROWS(init_rnb(bad, 1.0, fm, std::nullopt, 0));
  }
}

TEST_CASE("multi-scale vector") {
  CHECK(make_msrnb_scales(4, 2).scales == std::vector<int>{1, 1, 2, 2});
  CHECK(make_msrnb_scales(6, 3).scales == std::vector<int>{1, 1, 2, 2, 3, 3});
  const auto s = make_msrnb_scales(1000, 10).scales;
  REQUIRE(s.size() == 1000);
  for (int i = 0; i < 100; ++i) {
    CHECK(s[i] == 1);
    CHECK(s[900 + i] == 10);
  }
}

TEST_CASE("basis evaluation") {
  SUBCASE("periodic features make the basis periodic") {
    FourierFeatureMap fm{IntMatrix::Ones(1, 1), {2.0}};
    const int w[] = {1, 2, 30, 1};
    const RnbModel m = init_rnb(w, 2.0, fm, std::nullopt, 3);
    Matrix x(3, 1), xs(3, 1);
    x << -0.7, 0.1, 0.55;
    xs = (x.array() + 2.0).matrix();
    CHECK((evaluate_basis(m, x, 0).values - evaluate_basis(m, xs, 0).values).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("single neuron tanh(w sin x) has slope w at 0") {
    FourierFeatureMap fm{IntMatrix::Ones(1, 1), {2 * M_PI}};
    const int w[] = {1, 2, 1, 1};
    RnbModel m = init_rnb(w, 1.0, fm, std::nullopt, 0);
    m.hidden.layers[0].weight << 0.8, 0.0;  // acts on (sin x, cos x)
    m.hidden.layers[0].bias << 0.0;
    const BasisEvaluation e = evaluate_basis(m, Matrix::Zero(1, 1), 1);
    CHECK(e.grad[0](0, 0) == doctest::Approx(0.8).epsilon(1e-14));
  }
}

TEST_CASE("output layer") {
  const int w[] = {1, 20, 1};
  RnbModel m = init_rnb(w, 1.0, std::nullopt, std::nullopt, 2);
  Matrix x(4, 1);
  x << -1, -0.2, 0.3, 0.9;
  const BasisEvaluation e = evaluate_basis(m, x, 0);
  SUBCASE("zero weights give the bias") {
    m.out_bias << 1.5;
    CHECK((predict(m, e).array() == 1.5).all());
  }
  SUBCASE("linear in the coefficients") {
    const Matrix t1 = Matrix::Random(21, 1), t2 = Matrix::Random(21, 1);
    const Matrix lhs = predict_with(e, 2.0 * t1 - 3.0 * t2);
    const Matrix rhs = 2.0 * predict_with(e, t1) - 3.0 * predict_with(e, t2);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
  SUBCASE("one basis function scaled by two") {
    const int w1[] = {1, 1, 1};
    RnbModel m1 = init_rnb(w1, 1.0, std::nullopt, std::nullopt, 6);
    const BasisEvaluation e1 = evaluate_basis(m1, x, 0);
    Matrix theta(2, 1);
    theta << 2.0, 0.0;
    CHECK((predict_with(e1, theta) - 2.0 * e1.values).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("model save/load round trip is bitwise") {
  IntMatrix b(2, 1);
  b << 1, 2;
  FourierFeatureMap fm{b, {2.0}};
  const int w[] = {1, 4, 16, 1};
  RnbModel m = init_rnb(w, 1.7, fm, make_msrnb_scales(16, 2), 12);
  m.out_coeffs.setRandom();
  m.out_bias << 0.1 / 3;
  std::stringstream s;
  save_model(m, s);
  const RnbModel back = load_model(s);
  CHECK(same_hidden_parameters(m, back));
  CHECK(back.out_coeffs == m.out_coeffs);
  CHECK(back.out_bias == m.out_bias);
  CHECK(back.scale->scales == m.scale->scales);
  CHECK(back.feature_map->multipliers == m.feature_map->multipliers);
}
