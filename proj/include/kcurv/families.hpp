// Constructors for the example families used as ground truth across the
// test surface, plus seeded random generators.
#pragma once

#include <map>
#include <random>
#include <string>

#include "kcurv/adapted_basis.hpp"
#include "kcurv/tensor_core.hpp"

namespace kcurv {

// K(e_1,e_1) = lambda e_1, K(e_1,e_i) = (lambda/2) e_i,
// K(e_i,e_i) = (lambda/2) e_1; constant curvature lambda^2/4.
inline StatStructure make_lambda_quarter(int n, double lambda) {
  if (n < 2) throw validation_error("make_lambda_quarter: n must be >= 2");
  SymCubic c(n);
  c.at(0, 0, 0) = lambda;
  for (int i = 1; i < n; ++i) c.at(0, i, i) = lambda / 2.0;
  return StatStructure(Metric::identity(n), c);
}

// K(e_1,e_1) = lambda e_1, K(e_1,e_j) = mu e_j, K(e_j,e_j) = mu e_1.
inline StatStructure make_h_umbilical(int n, double lambda, double mu) {
  if (n < 2) throw validation_error("make_h_umbilical: n must be >= 2");
  SymCubic c(n);
  c.at(0, 0, 0) = lambda;
  for (int i = 1; i < n; ++i) c.at(0, i, i) = mu;
  return StatStructure(Metric::identity(n), c);
}

// Closed form k(X ^ Y) = mu^2 + mu (lambda - 2 mu) (x1^2 + y1^2) for
// orthonormal X, Y with e_1-components x1, y1.
inline double h_umbilical_curvature(double lambda, double mu, double x1,
                                    double y1) {
  const double r2 = x1 * x1 + y1 * y1;
  if (r2 > 1.0 + 1e-12)
    throw validation_error("h_umbilical_curvature: x1^2 + y1^2 > 1 is unrealizable");
  return mu * mu + mu * (lambda - 2.0 * mu) * r2;
}

// Trace-free structure of constant curvature A <= 0 from the closed-form
// parameter recursion, in the standard basis.
inline StatStructure make_tracefree_canonical(int n, double a) {
  const TracefreeParams p = tracefree_canonical_params(n, a);
  return StatStructure(Metric::identity(n),
                       detail::adapted_cubic(p.lambdas, p.mus));
}

// K(e_i,e_i) = v_i e_i, K(e_i,e_j) = 0; always [K,K] = 0.
inline StatStructure make_diagonal(const VectorXd& values) {
  const int n = static_cast<int>(values.size());
  SymCubic c(n);
  for (int i = 0; i < n; ++i) c.at(i, i, i) = values[i];
  return StatStructure(Metric::identity(n), c);
}

// Seeded random structure; entries i.i.d. uniform[-1,1] on canonical
// indices. With tracefree, the g-trace part is projected out exactly.
inline StatStructure make_random(int n, std::uint64_t seed, bool tracefree) {
  if (n < 1) throw validation_error("make_random: n must be >= 1");
  SymCubic c(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) c.at(i, j, k) = uni(rng);
  StatStructure s(Metric::identity(n), c);
  if (!tracefree) return s;
  // C <- C - (1/(n+2)) [g(X,Y) E(Z) + g(Y,Z) E(X) + g(Z,X) E(Y)]
  const VectorXd e = s.trace_vector();
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      for (int k = j; k < n; ++k) {
        double d = 0.0;
        if (i == j) d += e[k];
        if (j == k) d += e[i];
        if (k == i) d += e[j];
        c.at(i, j, k) -= d / (n + 2);
      }
  StatStructure out(Metric::identity(n), c);
  if (out.metric().norm(out.trace_vector()) > 1e-10 * (1.0 + c.max_abs()))
    throw numerical_error("make_random: trace-free projection failed");
  return out;
}

enum class FamilyKind {
  lambda_quarter,
  h_umbilical,
  tracefree_canonical,
  diagonal,
  random_dense,
  random_tracefree
};

struct FamilySpec {
  FamilyKind kind = FamilyKind::random_dense;
  int dim = 2;
  std::map<std::string, double> params;
  VectorXd values;  // for diagonal
  std::uint64_t seed = 0;

  StatStructure make() const {
    auto param = [&](const std::string& name) {
      auto it = params.find(name);
      if (it == params.end())
        throw validation_error("family: missing parameter '" + name + "'");
      return it->second;
    };
    switch (kind) {
      case FamilyKind::lambda_quarter:
        return make_lambda_quarter(dim, param("lambda"));
      case FamilyKind::h_umbilical:
        return make_h_umbilical(dim, param("lambda"), param("mu"));
      case FamilyKind::tracefree_canonical:
        return make_tracefree_canonical(dim, param("A"));
      case FamilyKind::diagonal:
        if (values.size() == 0)
          throw validation_error("family: diagonal requires a values list");
        return make_diagonal(values);
      case FamilyKind::random_dense:
        return make_random(dim, seed, false);
      case FamilyKind::random_tracefree:
        return make_random(dim, seed, true);
    }
    throw validation_error("family: unknown kind");
  }
};

inline FamilyKind family_kind_from_string(const std::string& s) {
  if (s == "lambda_quarter") return FamilyKind::lambda_quarter;
  if (s == "h_umbilical") return FamilyKind::h_umbilical;
  if (s == "tracefree_canonical") return FamilyKind::tracefree_canonical;
  if (s == "diagonal") return FamilyKind::diagonal;
  if (s == "random") return FamilyKind::random_dense;
  if (s == "random_tracefree") return FamilyKind::random_tracefree;
  throw validation_error("family: unknown kind '" + s + "'");
}

}  // namespace kcurv
