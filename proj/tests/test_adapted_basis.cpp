#include <catch_amalgamated.hpp>

#include <random>

#include "kcurv/adapted_basis.hpp"
#include "kcurv/families.hpp"

using namespace kcurv;

TEST_CASE("constant curvature detection") {
  const auto a = is_constant_curvature(make_lambda_quarter(4, 2.0));
  REQUIRE(a.has_value());
  CHECK(*a == Catch::Approx(1.0).margin(1e-10));

  const auto a0 =
      is_constant_curvature(StatStructure(Metric::identity(3), SymCubic(3)));
  REQUIRE(a0.has_value());
  CHECK(*a0 == 0.0);

  CHECK_FALSE(is_constant_curvature(make_h_umbilical(3, 3.0, 1.0)).has_value());
  CHECK_THROWS_AS(is_constant_curvature(make_lambda_quarter(2, 1.0), 0.0),
                  validation_error);
}

TEST_CASE("mu from lambda") {
  CHECK(mu_from_lambda(2.0, 1.0) == Catch::Approx(1.0).margin(1e-12));
  CHECK(mu_from_lambda(5.0, 0.0) == Catch::Approx(0.0).margin(1e-12));
  const double l = 2.0 / std::sqrt(3.0);
  CHECK(mu_from_lambda(l, -1.0) ==
        Catch::Approx(-1.0 / std::sqrt(3.0)).margin(1e-12));
  // the root satisfies -A + lambda mu - mu^2 = 0
  for (auto [lam, a] : {std::pair{2.0, 1.0}, {3.0, -2.0}, {0.5, -1.0}}) {
    const double mu = mu_from_lambda(lam, a);
    CHECK(std::abs(-a + lam * mu - mu * mu) <= 1e-12);
  }
  CHECK_THROWS_AS(mu_from_lambda(1.0, 1.0), numerical_error);
}

TEST_CASE("trace-free canonical parameters") {
  SECTION("n=3, A=-3") {
    const TracefreeParams p = tracefree_canonical_params(3, -3.0);
    CHECK(p.lambdas[0] == Catch::Approx(2.0).margin(1e-12));
    CHECK(p.mus[0] == Catch::Approx(-1.0).margin(1e-12));
    CHECK(p.As[0] == Catch::Approx(-3.0).margin(1e-12));
    CHECK(p.As[1] == Catch::Approx(-4.0).margin(1e-12));
    CHECK(p.lambdas[1] == Catch::Approx(std::sqrt(2.0)).margin(1e-12));
    CHECK(p.mus[1] == Catch::Approx(-std::sqrt(2.0)).margin(1e-12));
    CHECK(p.As[2] == Catch::Approx(-6.0).margin(1e-12));
    CHECK(p.lambdas[2] == 0.0);
  }
  SECTION("n=2, A=-1") {
    const TracefreeParams p = tracefree_canonical_params(2, -1.0);
    CHECK(p.lambdas[0] == Catch::Approx(std::sqrt(0.5)).margin(1e-12));
    CHECK(p.mus[0] == Catch::Approx(-std::sqrt(0.5)).margin(1e-12));
  }
  SECTION("A=0 collapses to zero") {
    const TracefreeParams p = tracefree_canonical_params(4, 0.0);
    CHECK(p.lambdas.cwiseAbs().maxCoeff() == 0.0);
    CHECK(p.mus.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("trace identity (n-i) mu_i + lambda_i = 0") {
    const int n = 5;
    const TracefreeParams p = tracefree_canonical_params(n, -2.5);
    for (int i = 0; i < n - 1; ++i)
      CHECK(std::abs((n - (i + 1)) * p.mus[i] + p.lambdas[i]) <= 1e-12);
  }
  CHECK_THROWS_AS(tracefree_canonical_params(1, -1.0), validation_error);
  CHECK_THROWS_AS(tracefree_canonical_params(3, 0.5), validation_error);
}

TEST_CASE("decomposition of the quarter family") {
  const AdaptedDecomposition d = decompose(make_lambda_quarter(3, 2.0));
  CHECK(d.lambdas[0] == Catch::Approx(2.0).margin(1e-8));
  CHECK(d.mus[0] == Catch::Approx(1.0).margin(1e-8));
  CHECK(d.As[0] == Catch::Approx(1.0).margin(1e-8));
  CHECK(d.As[1] == Catch::Approx(0.0).margin(1e-8));
  CHECK(d.As[2] == Catch::Approx(0.0).margin(1e-8));
  CHECK(d.residual <= 1e-8);
  // quarter-bound equality pattern: mu_1 = lambda_1 / 2
  CHECK(d.mus[0] == Catch::Approx(d.lambdas[0] / 2.0).margin(1e-8));
}

TEST_CASE("decomposition round trip on trace-free canonical structures") {
  for (auto [n, a] : {std::pair{3, -3.0}, {2, -1.0}, {4, -0.7}, {5, -2.2}}) {
    const StatStructure s = make_tracefree_canonical(n, a);
    const AdaptedDecomposition d = decompose(s);
    const TracefreeParams p = tracefree_canonical_params(n, a);
    for (int i = 0; i < n; ++i) {
      CHECK(d.lambdas[i] == Catch::Approx(p.lambdas[i]).margin(1e-8));
      CHECK(d.As[i] == Catch::Approx(p.As[i]).margin(1e-8));
    }
    for (int i = 0; i < n - 1; ++i)
      CHECK(d.mus[i] == Catch::Approx(p.mus[i]).margin(1e-8));
    // recursion invariants
    for (int i = 0; i + 1 < n; ++i) {
      CHECK(std::abs(d.As[i + 1] - (d.As[i] - d.mus[i] * d.mus[i])) <= 1e-10);
      CHECK(std::abs(d.mus[i] - mu_from_lambda(d.lambdas[i], d.As[i])) <= 1e-10);
    }
    // basis is g-orthonormal
    CHECK((d.basis.transpose() * s.metric().gram() * d.basis -
           MatrixXd::Identity(n, n))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
  }
}

TEST_CASE("decomposition of the zero cubic") {
  const AdaptedDecomposition d =
      decompose(StatStructure(Metric::identity(3), SymCubic(3)));
  CHECK(d.lambdas.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(d.mus.cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(d.As.cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("decomposition rejects non-constant curvature") {
  CHECK_THROWS_AS(decompose(make_h_umbilical(3, 3.0, 1.0)), validation_error);
}

TEST_CASE("decomposition is seed independent on trace-free inputs") {
  const StatStructure s = make_tracefree_canonical(3, -2.0);
  const AdaptedDecomposition ref = decompose(s, 1e-8, 0);
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const AdaptedDecomposition d = decompose(s, 1e-8, seed);
    CHECK((d.lambdas - ref.lambdas).cwiseAbs().maxCoeff() <= 1e-7);
    CHECK((d.mus - ref.mus).cwiseAbs().maxCoeff() <= 1e-7);
  }
}

TEST_CASE("decomposition of a rotated instance recovers the curvature") {
  const StatStructure base = make_tracefree_canonical(3, -1.5);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss;
  MatrixXd m(3, 3);
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = gauss(rng);
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(m).householderQ();
  const StatStructure rotated(Metric::identity(3),
                              base.cubic().transform(q.transpose()));
  const AdaptedDecomposition d = decompose(rotated);
  CHECK(d.As[0] == Catch::Approx(-1.5).margin(1e-8));
  const TracefreeParams p = tracefree_canonical_params(3, -1.5);
  for (int i = 0; i < 3; ++i)
    CHECK(d.lambdas[i] == Catch::Approx(p.lambdas[i]).margin(1e-7));
}

TEST_CASE("simultaneous diagonalization of commuting structures") {
  SECTION("rotated diagonal recovers the values as a set") {
    const VectorXd vals = (VectorXd(3) << 1.0, 2.0, 3.0).finished();
    const StatStructure diag = make_diagonal(vals);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    MatrixXd m(3, 3);
    for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = gauss(rng);
    const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(m).householderQ();
    const StatStructure rotated(Metric::identity(3),
                                diag.cubic().transform(q.transpose()));
    const DiagonalForm f = diagonalize_commuting(rotated);
    VectorXd sorted = f.values;
    std::sort(sorted.data(), sorted.data() + 3);
    CHECK(sorted[0] == Catch::Approx(1.0).margin(1e-7));
    CHECK(sorted[1] == Catch::Approx(2.0).margin(1e-7));
    CHECK(sorted[2] == Catch::Approx(3.0).margin(1e-7));
    // diagonal contract: K(e_i, e_j) = delta_ij lambda_i e_i
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const VectorXd k = rotated.k_from_c(f.basis.col(i), f.basis.col(j));
        const VectorXd expect =
            i == j ? VectorXd(f.values[i] * f.basis.col(i)) : VectorXd(VectorXd::Zero(3));
        CHECK((k - expect).cwiseAbs().maxCoeff() < 1e-7);
      }
  }
  SECTION("zero cubic diagonalizes to zero") {
    const DiagonalForm f =
        diagonalize_commuting(StatStructure(Metric::identity(2), SymCubic(2)));
    CHECK(f.values.cwiseAbs().maxCoeff() == 0.0);
  }
  SECTION("trace-free non-commuting candidate is rejected") {
    // K(e1,e1)=e1, K(e1,e2)=-e2, K(e2,e2)=-e1: trace-free, [K,K] != 0
    SymCubic c(2);
    c.at(0, 0, 0) = 1.0;
    c.at(0, 1, 1) = -1.0;
    const StatStructure s(Metric::identity(2), c);
    CHECK(s.is_trace_free(1e-10));
    CHECK_THROWS_AS(diagonalize_commuting(s), validation_error);
  }
}
