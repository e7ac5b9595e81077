// Constant-curvature detection, the recursive adapted-basis decomposition,
// the trace-free closed forms and the diagonal form for commuting K.
#pragma once

#include <optional>

#include "kcurv/phi_optimizer.hpp"
#include "kcurv/tensor_core.hpp"

namespace kcurv {

struct AdaptedDecomposition {
  MatrixXd basis;    // columns e_1 .. e_n, g-orthonormal
  VectorXd lambdas;  // lambda_1 .. lambda_n (last one is the final diagonal value)
  VectorXd mus;      // mu_1 .. mu_{n-1}
  VectorXd As;       // A_0 .. A_{n-1}
  double residual = 0.0;  // reconstruction residual, relative
};

// Tests g(K(X,W),K(Y,Z)) - g(K(Y,W),K(X,Z)) = A [g(X,W)g(Y,Z) - g(Y,W)g(X,Z)]
// over all basis quadruples; A is fitted by least squares over the
// non-degenerate quadruples.
inline std::optional<double> is_constant_curvature(const StatStructure& s,
                                                   double tol = 1e-8) {
  if (!(tol > 0)) throw validation_error("is_constant_curvature: tol must be > 0");
  const int n = s.dim();
  const MatrixXd& g = s.metric().gram();
  std::vector<VectorXd> k(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      k[i * n + j] = s.k_from_c(VectorXd::Unit(n, i), VectorXd::Unit(n, j));
      k[j * n + i] = k[i * n + j];
    }
  auto lhs = [&](int x, int w, int y, int z) {
    return k[x * n + w].dot(g * k[y * n + z]) -
           k[y * n + w].dot(g * k[x * n + z]);
  };
  auto rhs = [&](int x, int w, int y, int z) {
    return g(x, w) * g(y, z) - g(y, w) * g(x, z);
  };
  double num = 0.0, den = 0.0;
  for (int x = 0; x < n; ++x)
    for (int w = 0; w < n; ++w)
      for (int y = 0; y < n; ++y)
        for (int z = 0; z < n; ++z) {
          num += lhs(x, w, y, z) * rhs(x, w, y, z);
          den += rhs(x, w, y, z) * rhs(x, w, y, z);
        }
  if (den <= 0) return std::nullopt;  // cannot happen for SPD g, n >= 2
  const double a = num / den;
  const double c = s.cubic().max_abs();
  double max_res = 0.0;
  for (int x = 0; x < n; ++x)
    for (int w = 0; w < n; ++w)
      for (int y = 0; y < n; ++y)
        for (int z = 0; z < n; ++z)
          max_res = std::max(
              max_res, std::abs(lhs(x, w, y, z) - a * rhs(x, w, y, z)));
  if (max_res <= tol * (1.0 + a * a + c * c)) return a;
  return std::nullopt;
}

// mu_i = (lambda_i - sqrt(lambda_i^2 - 4 A_{i-1})) / 2, the root excluded
// from above by the second-order maximum condition.
inline double mu_from_lambda(double lambda_i, double a_prev) {
  double disc = lambda_i * lambda_i - 4.0 * a_prev;
  if (disc < -1e-12)
    throw numerical_error("mu_from_lambda: negative discriminant, inconsistent constant-curvature data");
  if (disc < 0) disc = 0;
  return (lambda_i - std::sqrt(disc)) / 2.0;
}

struct TracefreeParams {
  VectorXd lambdas;  // length n, last is 0
  VectorXd mus;      // length n - 1
  VectorXd As;       // A_0 .. A_{n-1}
};

// Closed forms for trace-free constant curvature A <= 0:
// lambda_i = (n-i) sqrt(-A_{i-1}/(n-i+1)), mu_i = -sqrt(-A_{i-1}/(n-i+1)).
inline TracefreeParams tracefree_canonical_params(int n, double a) {
  if (n < 2) throw validation_error("tracefree_canonical_params: n must be >= 2");
  if (a > 0) throw validation_error("tracefree_canonical_params: A must be <= 0");
  TracefreeParams p;
  p.lambdas = VectorXd::Zero(n);
  p.mus = VectorXd::Zero(n - 1);
  p.As = VectorXd::Zero(n);
  double ai = a;
  for (int i = 1; i < n; ++i) {
    p.As[i - 1] = ai;
    const double root = std::sqrt(-ai / (n - i + 1));
    p.lambdas[i - 1] = (n - i) * root;
    p.mus[i - 1] = -root;
    ai -= root * root;
  }
  p.As[n - 1] = ai;
  p.lambdas[n - 1] = 0.0;
  return p;
}

namespace detail {

// Cubic form of the adapted recipe K(e_i,e_i) = mu_1 e_1 + ... + lambda_i e_i,
// K(e_i,e_j) = mu_i e_j (i < j), expressed in the basis itself.
inline SymCubic adapted_cubic(const VectorXd& lambdas, const VectorXd& mus) {
  const int n = static_cast<int>(lambdas.size());
  SymCubic c(n);
  for (int i = 0; i < n; ++i) c.at(i, i, i) = lambdas[i];
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) c.at(i, j, j) = mus[i];
  return c;
}

}  // namespace detail

// Recursive decomposition of a constant-curvature structure into an adapted
// orthonormal basis with parameters lambda_i, mu_i, A_i.
inline AdaptedDecomposition decompose(const StatStructure& s,
                                      double tol = 1e-8,
                                      std::uint64_t seed = 0) {
  const auto a0 = is_constant_curvature(s, tol);
  if (!a0)
    throw validation_error("decompose: structure does not have constant K-curvature");
  const int n = s.dim();
  AdaptedDecomposition d;
  d.basis = MatrixXd(n, n);
  d.lambdas = VectorXd::Zero(n);
  d.mus = VectorXd::Zero(std::max(n - 1, 0));
  d.As = VectorXd::Zero(n);

  StatStructure cur = s;
  MatrixXd embed = MatrixXd::Identity(n, n);  // current coords -> ambient
  double a = *a0;
  const double scale = 1.0 + s.cubic().max_abs();
  for (int level = 0; level < n - 1; ++level) {
    const CriticalPoint e1 = find_local_max(cur, 16, seed);
    const double li = e1.value;
    const double mi = mu_from_lambda(li, a);
    // K_{e1} restricted to the complement must be mu_i * identity.
    const MatrixXd w = cur.complement_frame(e1.x);
    const MatrixXd rest =
        w.transpose() * cur.metric().gram() * cur.k_operator(e1.x) * w;
    const double prop_res =
        (rest - mi * MatrixXd::Identity(w.cols(), w.cols())).cwiseAbs().maxCoeff();
    if (prop_res > std::max(tol, 1e-7) * scale)
      throw numerical_error("decompose: K_{e1} on the complement is not proportional to the identity (residual " +
                            std::to_string(prop_res) + ")");
    d.basis.col(level) = embed * e1.x;
    d.lambdas[level] = li;
    d.mus[level] = mi;
    d.As[level] = a;
    auto [proj, frame] = cur.project_k(e1.x);
    embed = embed * frame;
    cur = proj;
    a -= mi * mi;
  }
  // dim-1 bottom: take the sign maximizing Phi.
  {
    const double c111 = cur.cubic().eval(VectorXd::Ones(1), VectorXd::Ones(1),
                                         VectorXd::Ones(1));
    const double sgn = c111 >= 0 ? 1.0 : -1.0;
    d.basis.col(n - 1) = embed * VectorXd::Constant(1, sgn);
    d.lambdas[n - 1] = sgn * c111;
    d.As[n - 1] = a;
  }

  // Reconstruction check against the input form.
  const SymCubic in_adapted = s.cubic().transform(d.basis);
  const SymCubic rebuilt = detail::adapted_cubic(d.lambdas, d.mus);
  double res = 0.0;
  for (size_t i = 0; i < rebuilt.entries().size(); ++i)
    res = std::max(res,
                   std::abs(in_adapted.entries()[i] - rebuilt.entries()[i]));
  d.residual = res / scale;
  if (d.residual > std::max(tol, 1e-8))
    throw numerical_error("decompose: reconstruction residual " +
                          std::to_string(d.residual) + " exceeds tolerance");
  return d;
}

struct DiagonalForm {
  MatrixXd basis;  // g-orthonormal, K(e_i, e_j) = delta_ij lambda_i e_i
  VectorXd values;
};

// Simultaneous diagonalization for [K,K] = 0: all K_X commute, so the
// eigenbasis of a generic combination is a common eigenbasis.
inline DiagonalForm diagonalize_commuting(const StatStructure& s,
                                          double tol = 1e-8) {
  const int n = s.dim();
  const double scale = 1.0 + s.cubic().max_abs() * s.cubic().max_abs();
  const CurvatureLikeResiduals r = s.curvature_like_residuals();
  if (r.scale > tol * scale)
    throw validation_error("diagonalize_commuting: [K,K] != 0");

  const MatrixXd frame = s.metric().orthonormal_frame();
  const SymCubic c =
      s.metric().is_identity() ? s.cubic() : s.cubic().transform(frame);
  std::mt19937_64 rng(0x9e3779b97f4a7c15ull);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double check_tol = std::max(tol, 1e-7) * (1.0 + s.cubic().max_abs());
  for (int attempt = 0; attempt < 8; ++attempt) {
    VectorXd w(n);
    for (int i = 0; i < n; ++i) w[i] = gauss(rng);
    const MatrixXd m = c.contract1(w.normalized());
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(m);
    const MatrixXd& q = es.eigenvectors();
    // verify the joint-diagonalization contract
    bool ok = true;
    VectorXd vals(n);
    for (int i = 0; i < n && ok; ++i) {
      const VectorXd kii = c.contract2(q.col(i), q.col(i));
      vals[i] = kii.dot(q.col(i));
      if ((kii - vals[i] * q.col(i)).cwiseAbs().maxCoeff() > check_tol) ok = false;
      for (int j = i + 1; j < n && ok; ++j)
        if (c.contract2(q.col(i), q.col(j)).cwiseAbs().maxCoeff() > check_tol)
          ok = false;
    }
    if (!ok) continue;
    DiagonalForm out;
    out.basis = s.metric().is_identity() ? q : MatrixXd(frame * q);
    out.values = vals;
    if (s.is_trace_free(std::max(tol, kDefaultTol))) {
      if (vals.cwiseAbs().maxCoeff() > check_tol)
        throw numerical_error("diagonalize_commuting: trace-free with [K,K]=0 must have K=0");
    }
    return out;
  }
  throw numerical_error("diagonalize_commuting: no generic combination separated the spectrum");
}

}  // namespace kcurv
