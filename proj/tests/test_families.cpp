#include <catch_amalgamated.hpp>

#include <random>

#include "kcurv/adapted_basis.hpp"
#include "kcurv/families.hpp"

using namespace kcurv;

namespace {

Plane random_plane(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss;
  VectorXd u(n), v(n);
  do {
    for (int i = 0; i < n; ++i) { u[i] = gauss(rng); v[i] = gauss(rng); }
  } while (std::abs(u.normalized().dot(v.normalized())) > 0.99);
  return {u, v};
}

}  // namespace

TEST_CASE("quarter family curvature") {
  const auto a = is_constant_curvature(make_lambda_quarter(3, 2.0));
  REQUIRE(a);
  CHECK(*a == Catch::Approx(1.0).margin(1e-10));

  CHECK(make_lambda_quarter(4, 0.0).cubic().max_abs() == 0.0);

  // sign independence
  std::mt19937_64 rng(1);
  const StatStructure neg = make_lambda_quarter(2, -2.0);
  for (int t = 0; t < 20; ++t)
    CHECK(neg.sectional_k_curvature(random_plane(2, rng)) ==
          Catch::Approx(1.0).margin(1e-10));
  CHECK_THROWS_AS(make_lambda_quarter(1, 1.0), validation_error);
}

TEST_CASE("h-umbilical matches its closed form") {
  const int n = 4;
  const double lambda = 3.0, mu = 1.0;
  const StatStructure s = make_h_umbilical(n, lambda, mu);
  // closed form: K(X,Y) = (lambda - 3 mu) <X,e1><Y,e1> e1
  //              + mu (<X,Y> e1 + <X,e1> Y + <Y,e1> X)
  const VectorXd e1 = VectorXd::Unit(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const VectorXd x = VectorXd::Unit(n, i), y = VectorXd::Unit(n, j);
      const VectorXd closed = (lambda - 3.0 * mu) * x[0] * y[0] * e1 +
                              mu * (x.dot(y) * e1 + x[0] * y + y[0] * x);
      CHECK((s.k_from_c(x, y) - closed).cwiseAbs().maxCoeff() <= 1e-12);
    }
  // E = (lambda + (n-1) mu) e1
  CHECK((s.trace_vector() - (lambda + (n - 1) * mu) * e1).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("h-umbilical curvature cases from the closed formula") {
  SECTION("lambda = 2 mu is constant") {
    const auto a = is_constant_curvature(make_h_umbilical(3, 2.0, 1.0));
    REQUIRE(a);
    CHECK(*a == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("lambda = 3 mu samples lie in [mu^2, 2 mu^2]") {
    const StatStructure s = make_h_umbilical(3, 3.0, 1.0);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 500; ++t) {
      const double k = s.sectional_k_curvature(random_plane(3, rng));
      CHECK(k >= 1.0 - 1e-9);
      CHECK(k <= 2.0 + 1e-9);
    }
  }
  SECTION("lambda = 0 samples lie in [-mu^2, mu^2]") {
    const StatStructure s = make_h_umbilical(3, 0.0, 1.0);
    std::mt19937_64 rng(6);
    for (int t = 0; t < 500; ++t) {
      const double k = s.sectional_k_curvature(random_plane(3, rng));
      CHECK(k >= -1.0 - 1e-9);
      CHECK(k <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("h_umbilical_curvature closed form") {
  CHECK(h_umbilical_curvature(3, 1, 0, 0) == Catch::Approx(1.0));
  CHECK(h_umbilical_curvature(3, 1, 1, 0) == Catch::Approx(2.0));
  CHECK(h_umbilical_curvature(0, 0, 0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(h_umbilical_curvature(3, 1, 1.0, 0.5), validation_error);

  // matches sectional curvature on realizable planes
  const double lambda = 3.0, mu = 1.0;
  const StatStructure s = make_h_umbilical(3, lambda, mu);
  const VectorXd e1 = VectorXd::Unit(3, 0), e2 = VectorXd::Unit(3, 1),
                 e3 = VectorXd::Unit(3, 2);
  CHECK(s.sectional_k_curvature({e1, e2}) ==
        Catch::Approx(h_umbilical_curvature(lambda, mu, 1, 0)).margin(1e-10));
  CHECK(s.sectional_k_curvature({e2, e3}) ==
        Catch::Approx(h_umbilical_curvature(lambda, mu, 0, 0)).margin(1e-10));
  for (double alpha : {0.3, 0.7, 1.2}) {
    const VectorXd x = std::cos(alpha) * e1 + std::sin(alpha) * e2;
    CHECK(s.sectional_k_curvature({x, e3}) ==
          Catch::Approx(h_umbilical_curvature(lambda, mu, std::cos(alpha), 0))
              .margin(1e-10));
  }
}

TEST_CASE("sign-case bounds for the h-umbilical curvature") {
  // mu (lambda - 2 mu) >= 0: mu^2 <= k <= mu (lambda - mu); reversed otherwise
  for (auto [lambda, mu] : {std::pair{3.0, 1.0}, {1.0, 1.0}}) {
    const double lo = std::min(mu * mu, mu * (lambda - mu));
    const double hi = std::max(mu * mu, mu * (lambda - mu));
    for (double r2 : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      const double k = h_umbilical_curvature(lambda, mu, std::sqrt(r2), 0.0);
      CHECK(k >= lo - 1e-12);
      CHECK(k <= hi + 1e-12);
    }
  }
}

TEST_CASE("trace-free canonical family") {
  const StatStructure s = make_tracefree_canonical(3, -3.0);
  CHECK(s.is_trace_free(1e-10));
  const auto a = is_constant_curvature(s);
  REQUIRE(a);
  CHECK(*a == Catch::Approx(-3.0).margin(1e-8));

  CHECK(make_tracefree_canonical(3, 0.0).cubic().max_abs() == 0.0);

  const StatStructure s2 = make_tracefree_canonical(2, -1.0);
  const auto a2 = is_constant_curvature(s2);
  REQUIRE(a2);
  CHECK(*a2 == Catch::Approx(-1.0).margin(1e-8));
  CHECK(s2.cubic()(0, 0, 0) == Catch::Approx(std::sqrt(0.5)).margin(1e-12));
  CHECK(s2.cubic()(0, 1, 1) == Catch::Approx(-std::sqrt(0.5)).margin(1e-12));
}

TEST_CASE("diagonal family commutes") {
  const VectorXd vals = (VectorXd(3) << 1.0, 2.0, 3.0).finished();
  const StatStructure s = make_diagonal(vals);
  CHECK(s.curvature_like_residuals().scale == 0.0);
  CHECK(make_diagonal(VectorXd::Zero(2)).cubic().max_abs() == 0.0);
  const StatStructure pm = make_diagonal((VectorXd(2) << 1.0, -1.0).finished());
  CHECK(pm.metric().norm(pm.trace_vector()) > 0.5);
  CHECK_FALSE(pm.is_trace_free(1e-10));
}

TEST_CASE("random generator determinism and projection") {
  const StatStructure a = make_random(3, 7, false);
  const StatStructure b = make_random(3, 7, false);
  CHECK(a.cubic().entries() == b.cubic().entries());

  const StatStructure t = make_random(4, 1, true);
  CHECK(t.is_trace_free(1e-10));

  const StatStructure r = make_random(2, 0, false);
  const CurvatureLikeResiduals res = r.curvature_like_residuals();
  CHECK(res.antisymmetry <= 1e-10 * (1.0 + res.scale));
}

TEST_CASE("family specs build the right structures") {
  FamilySpec f;
  f.kind = FamilyKind::lambda_quarter;
  f.dim = 3;
  f.params["lambda"] = 2.0;
  CHECK(f.make().cubic()(0, 0, 0) == 2.0);
  f.params.clear();
  CHECK_THROWS_AS(f.make(), validation_error);

  CHECK(family_kind_from_string("random") == FamilyKind::random_dense);
  CHECK_THROWS_AS(family_kind_from_string("nope"), validation_error);
}
