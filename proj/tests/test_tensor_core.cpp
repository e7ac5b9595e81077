#include <catch_amalgamated.hpp>

#include <random>

#include "kcurv/families.hpp"
#include "kcurv/tensor_core.hpp"

using namespace kcurv;

namespace {

StatStructure random_structure(int n, std::uint64_t seed) {
  return make_random(n, seed, false);
}

}  // namespace

TEST_CASE("metric validation") {
  CHECK_NOTHROW(Metric::identity(3));
  MatrixXd bad(2, 2);
  bad << 1, 2, 3, 1;
  CHECK_THROWS_AS(Metric(bad), validation_error);  // not symmetric
  MatrixXd indef(2, 2);
  indef << 1, 2, 2, 1;
  CHECK_THROWS_AS(Metric(indef), validation_error);  // not SPD
  CHECK_THROWS_AS(Metric(MatrixXd::Identity(kMaxDim + 1, kMaxDim + 1)),
                  validation_error);
}

TEST_CASE("metric raise and orthonormal frame") {
  MatrixXd g(2, 2);
  g << 2, 1, 1, 3;
  Metric m(g);
  const VectorXd w = VectorXd::LinSpaced(2, 1.0, 2.0);
  CHECK((g * m.raise(w) - w).cwiseAbs().maxCoeff() < 1e-14);
  const MatrixXd b = m.orthonormal_frame();
  CHECK((b.transpose() * g * b - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
        1e-14);
}

TEST_CASE("packed cubic storage is totally symmetric") {
  SymCubic c(4);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uni(-1, 1);
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j)
      for (int k = j; k < 4; ++k) c.at(i, j, k) = uni(rng);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        CHECK(c(i, j, k) == c(j, k, i));
        CHECK(c(i, j, k) == c(k, i, j));
        CHECK(c(i, j, k) == c(j, i, k));
      }
  CHECK(static_cast<int>(c.entries().size()) == SymCubic::packed_size(4));
}

TEST_CASE("packed index covers each slot exactly once") {
  SymCubic c(5);
  std::vector<int> hit(c.entries().size(), 0);
  for (int i = 0; i < 5; ++i)
    for (int j = i; j < 5; ++j)
      for (int k = j; k < 5; ++k) ++hit[c.packed_index(i, j, k)];
  for (int h : hit) CHECK(h == 1);
}

TEST_CASE("contractions agree with eval") {
  const StatStructure s = random_structure(3, 5);
  const SymCubic& c = s.cubic();
  std::mt19937_64 rng(6);
  std::normal_distribution<double> gauss;
  VectorXd x(3), y(3), z(3);
  for (int i = 0; i < 3; ++i) { x[i] = gauss(rng); y[i] = gauss(rng); z[i] = gauss(rng); }
  CHECK(c.contract2(y, z).dot(x) == Catch::Approx(c.eval(x, y, z)).margin(1e-13));
  CHECK(x.dot(c.contract1(z) * y) == Catch::Approx(c.eval(x, y, z)).margin(1e-13));
}

TEST_CASE("k_from_c with a non-identity metric") {
  // g = diag(2,1), C(e1,e1,e1) = 2: K(e1,e1) = g^{-1} C(., e1, e1) = e1
  MatrixXd g(2, 2);
  g << 2, 0, 0, 1;
  SymCubic c(2);
  c.at(0, 0, 0) = 2.0;
  StatStructure s(Metric(g), c);
  const VectorXd k = s.k_from_c(VectorXd::Unit(2, 0), VectorXd::Unit(2, 0));
  CHECK((k - VectorXd::Unit(2, 0)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("bracket on the quarter-curvature family") {
  // n=2, lambda=2: [K,K](e1,e2)e2 = e1
  const StatStructure s = make_lambda_quarter(2, 2.0);
  const VectorXd b = s.bracket_kk(VectorXd::Unit(2, 0), VectorXd::Unit(2, 1),
                                  VectorXd::Unit(2, 1));
  CHECK((b - VectorXd::Unit(2, 0)).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(s.sectional_k_curvature({VectorXd::Unit(2, 0), VectorXd::Unit(2, 1)}) ==
        Catch::Approx(1.0).margin(1e-14));
}

TEST_CASE("negative-minimum example curvature is exactly 2") {
  SymCubic c(2);
  c.at(0, 0, 0) = -3.0;
  c.at(0, 1, 1) = -2.0;
  StatStructure s(Metric::identity(2), c);
  const double k =
      s.sectional_k_curvature({VectorXd::Unit(2, 0), VectorXd::Unit(2, 1)});
  CHECK(std::abs(k - 2.0) <= 1e-12);
}

TEST_CASE("sectional curvature is basis independent within the plane") {
  const StatStructure s = random_structure(4, 17);
  std::mt19937_64 rng(18);
  std::normal_distribution<double> gauss;
  VectorXd u(4), v(4);
  for (int i = 0; i < 4; ++i) { u[i] = gauss(rng); v[i] = gauss(rng); }
  const double k1 = s.sectional_k_curvature({u, v});
  const double k2 = s.sectional_k_curvature({v, u});
  const double k3 = s.sectional_k_curvature({2.0 * u - v, 3.0 * v});
  CHECK(k1 == Catch::Approx(k2).margin(1e-10));
  CHECK(k1 == Catch::Approx(k3).margin(1e-10));
}

TEST_CASE("degenerate plane is rejected") {
  const StatStructure s = random_structure(3, 2);
  const VectorXd u = VectorXd::Unit(3, 0);
  CHECK_THROWS_AS(s.sectional_k_curvature({u, 2.0 * u}), validation_error);
}

TEST_CASE("curvature-like residuals vanish for derived brackets") {
  for (std::uint64_t seed : {0, 1, 2, 3}) {
    const StatStructure s = random_structure(4, seed);
    const CurvatureLikeResiduals r = s.curvature_like_residuals();
    const double tol = 1e-10 * (1.0 + r.scale);
    CHECK(r.antisymmetry <= tol);
    CHECK(r.bianchi <= tol);
    CHECK(r.skewness <= tol);
  }
}

TEST_CASE("trace vector of the quarter-curvature family") {
  const StatStructure s = make_lambda_quarter(3, 2.0);
  // E = 2 e1 + e1 + e1 = 4 e1
  CHECK((s.trace_vector() - 4.0 * VectorXd::Unit(3, 0)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK_FALSE(s.is_trace_free());
}

TEST_CASE("projection onto the complement of e1") {
  const StatStructure s = make_lambda_quarter(3, 2.0);
  auto [proj, frame] = s.project_k(VectorXd::Unit(3, 0));
  CHECK(proj.dim() == 2);
  // C vanishes on span(e2, e3)
  CHECK(proj.cubic().max_abs() < 1e-14);
  CHECK((frame.transpose() * s.metric().gram() * frame -
         MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
  CHECK_THROWS_AS(s.project_k(2.0 * VectorXd::Unit(3, 0)), validation_error);
}

TEST_CASE("cubic transform is a pullback") {
  const StatStructure s = random_structure(3, 9);
  std::mt19937_64 rng(10);
  std::normal_distribution<double> gauss;
  MatrixXd b(3, 3);
  for (int i = 0; i < 9; ++i) b(i / 3, i % 3) = gauss(rng);
  const SymCubic t = s.cubic().transform(b);
  VectorXd x(3), y(3), z(3);
  for (int i = 0; i < 3; ++i) { x[i] = gauss(rng); y[i] = gauss(rng); z[i] = gauss(rng); }
  CHECK(t.eval(x, y, z) ==
        Catch::Approx(s.cubic().eval(b * x, b * y, b * z)).margin(1e-12));
}

TEST_CASE("dimension mismatches are rejected") {
  const StatStructure s = random_structure(3, 1);
  CHECK_THROWS_AS(s.k_from_c(VectorXd::Zero(2), VectorXd::Zero(3)),
                  validation_error);
  CHECK_THROWS_AS(StatStructure(Metric::identity(2), SymCubic(3)),
                  validation_error);
}
