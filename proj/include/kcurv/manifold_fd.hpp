// Finite-difference chart calculus: Levi-Civita symbols, the statistical
// connections nabla = hat + K and its conjugate, their curvature tensors,
// and the identity checks relating them.
#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kcurv/tensor_core.hpp"

namespace kcurv {

// Analytic statistical structure on an open box in coordinate space.
struct ChartField {
  int dim = 0;
  std::function<MatrixXd(const VectorXd&)> g_at;
  std::function<SymCubic(const VectorXd&)> c_at;
  MatrixXd domain;  // dim x 2, [lo, hi] per coordinate
  double fd_step = 1e-3;
};

// (1,3) tensor at a point, stored as endomorphism matrices T(i,j) with
// entry (l, k) = T^l_{kij}.
using Tensor13 = std::vector<MatrixXd>;

struct CurvatureSample {
  VectorXd point;
  Tensor13 Rhat, R, Rbar, bracketKK;
};

namespace fd {

inline void require_interior(const ChartField& f, const VectorXd& p,
                             double margin) {
  if (p.size() != f.dim)
    throw validation_error("chart: point dimension mismatch");
  for (int i = 0; i < f.dim; ++i)
    if (p[i] - f.domain(i, 0) < margin * (1.0 - 1e-9) ||
        f.domain(i, 1) - p[i] < margin * (1.0 - 1e-9))
      throw validation_error("chart: point too close to the domain boundary");
}

// 4th-order central difference of a matrix-valued function.
inline MatrixXd d1(const std::function<MatrixXd(const VectorXd&)>& fn,
                   const VectorXd& p, int dir, double h) {
  VectorXd q = p;
  auto at = [&](double off) {
    q[dir] = p[dir] + off;
    return fn(q);
  };
  return (-at(2 * h) + 8 * at(h) - 8 * at(-h) + at(-2 * h)) / (12 * h);
}

inline MatrixXd inverse_spd(const MatrixXd& g) {
  return g.llt().solve(MatrixXd::Identity(g.rows(), g.cols()));
}

// K^l_{ij} component matrices: kk[i](l, j).
inline std::vector<MatrixXd> k_components(const ChartField& f,
                                          const VectorXd& p) {
  const MatrixXd ginv = inverse_spd(f.g_at(p));
  const SymCubic c = f.c_at(p);
  std::vector<MatrixXd> kk(f.dim);
  for (int i = 0; i < f.dim; ++i)
    kk[i] = ginv * c.contract1(VectorXd::Unit(f.dim, i));
  return kk;
}

}  // namespace fd

// Levi-Civita symbols from central differences of g; gam[i](l, j) = Gamma^l_{ij}.
inline std::vector<MatrixXd> christoffel_hat(const ChartField& f,
                                             const VectorXd& p) {
  fd::require_interior(f, p, 2 * f.fd_step);
  const int n = f.dim;
  const MatrixXd ginv = fd::inverse_spd(f.g_at(p));
  std::vector<MatrixXd> dg(n);
  for (int d = 0; d < n; ++d) dg[d] = fd::d1(f.g_at, p, d, f.fd_step);
  std::vector<MatrixXd> gam(n, MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      VectorXd low(n);
      for (int l = 0; l < n; ++l)
        low[l] = 0.5 * (dg[i](j, l) + dg[j](i, l) - dg[l](i, j));
      const VectorXd up = ginv * low;
      for (int l = 0; l < n; ++l) {
        gam[i](l, j) = up[l];
        gam[j](l, i) = up[l];
      }
    }
  return gam;
}

struct ConnectionPair {
  std::vector<MatrixXd> nabla;      // hat + K
  std::vector<MatrixXd> nabla_bar;  // hat - K
};

inline ConnectionPair statistical_connections(const ChartField& f,
                                              const VectorXd& p) {
  const auto gam = christoffel_hat(f, p);
  const auto kk = fd::k_components(f, p);
  ConnectionPair out;
  out.nabla.resize(f.dim);
  out.nabla_bar.resize(f.dim);
  for (int i = 0; i < f.dim; ++i) {
    out.nabla[i] = gam[i] + kk[i];
    out.nabla_bar[i] = gam[i] - kk[i];
  }
  return out;
}

struct CodazziResiduals {
  double codazzi = 0.0;    // max |nabla g (X,Y,Z) + 2 C(X,Y,Z)|
  double asymmetry = 0.0;  // max |nabla g (X,Y,Z) - nabla g (Y,X,Z)|
};

inline CodazziResiduals check_codazzi(const ChartField& f, const VectorXd& p) {
  fd::require_interior(f, p, 2 * f.fd_step);
  const int n = f.dim;
  const auto conn = statistical_connections(f, p).nabla;
  const SymCubic c = f.c_at(p);
  const MatrixXd g = f.g_at(p);
  std::vector<MatrixXd> dg(n);
  for (int d = 0; d < n; ++d) dg[d] = fd::d1(f.g_at, p, d, f.fd_step);
  CodazziResiduals r;
  std::vector<std::vector<VectorXd>> nab(n, std::vector<VectorXd>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      VectorXd row(n);
      for (int k = 0; k < n; ++k) {
        double v = dg[i](j, k);
        for (int m = 0; m < n; ++m)
          v -= conn[i](m, j) * g(m, k) + conn[i](m, k) * g(j, m);
        row[k] = v;
      }
      nab[i][j] = row;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        r.codazzi = std::max(r.codazzi, std::abs(nab[i][j][k] + 2.0 * c(i, j, k)));
        r.asymmetry =
            std::max(r.asymmetry, std::abs(nab[i][j][k] - nab[j][i][k]));
      }
  return r;
}

namespace fd {

// Curvature of a connection given by a symbol field, nested central
// differences: R(i,j) = d_i G_j - d_j G_i + [G_i, G_j].
inline Tensor13 curvature_of(
    const std::function<std::vector<MatrixXd>(const VectorXd&)>& symbols,
    const VectorXd& p, int n, double h) {
  const auto at = symbols(p);
  std::vector<std::vector<MatrixXd>> dsym(n);
  for (int d = 0; d < n; ++d) {
    VectorXd q = p;
    q[d] = p[d] + h;
    const auto plus = symbols(q);
    q[d] = p[d] - h;
    const auto minus = symbols(q);
    dsym[d].resize(n);
    for (int j = 0; j < n; ++j) dsym[d][j] = (plus[j] - minus[j]) / (2 * h);
  }
  Tensor13 r(n * n, MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      r[i * n + j] = dsym[i][j] - dsym[j][i] + at[i] * at[j] - at[j] * at[i];
  return r;
}

}  // namespace fd

inline CurvatureSample curvature_tensors(const ChartField& f,
                                         const VectorXd& p) {
  fd::require_interior(f, p, 3 * f.fd_step);
  const int n = f.dim;
  CurvatureSample s;
  s.point = p;
  s.Rhat = fd::curvature_of(
      [&](const VectorXd& q) { return christoffel_hat(f, q); }, p, n,
      f.fd_step);
  s.R = fd::curvature_of(
      [&](const VectorXd& q) { return statistical_connections(f, q).nabla; },
      p, n, f.fd_step);
  s.Rbar = fd::curvature_of(
      [&](const VectorXd& q) {
        return statistical_connections(f, q).nabla_bar;
      },
      p, n, f.fd_step);
  const auto kk = fd::k_components(f, p);
  s.bracketKK.assign(n * n, MatrixXd::Zero(n, n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      s.bracketKK[i * n + j] = kk[i] * kk[j] - kk[j] * kk[i];
  return s;
}

struct IdentityReport {
  double duality = 0.0;
  double sum_identity = 0.0;
  std::optional<double> hessian_relation;  // only when ||R|| <= tol
  double bianchi = 0.0;
  double nabla_hat_k_symmetry = 0.0;
  bool r_equals_rbar = false;
  bool nabla_k_symmetric = false;
  bool r_skew_in_zw = false;
  bool lemma21_agree = false;
  double tolerance = 0.0;
  double scale = 0.0;
  // The derivation K_U . acts on all four slots of the (1,3) tensor.
  static constexpr const char* kDerivationConvention = "all-slots";
};

namespace fd {

// nabla-hat K at p: out[u][i](l, j) = (hat-nabla_u K)^l_{ij}.
inline std::vector<std::vector<MatrixXd>> nabla_hat_k(const ChartField& f,
                                                      const VectorXd& p) {
  const int n = f.dim;
  const auto gam = christoffel_hat(f, p);
  const auto kk = k_components(f, p);
  std::vector<std::vector<MatrixXd>> dk(n);
  for (int u = 0; u < n; ++u) {
    VectorXd q = p;
    q[u] = p[u] + f.fd_step;
    const auto plus = k_components(f, q);
    q[u] = p[u] - f.fd_step;
    const auto minus = k_components(f, q);
    dk[u].resize(n);
    for (int i = 0; i < n; ++i)
      dk[u][i] = (plus[i] - minus[i]) / (2 * f.fd_step);
  }
  std::vector<std::vector<MatrixXd>> out(n, std::vector<MatrixXd>(n));
  for (int u = 0; u < n; ++u)
    for (int i = 0; i < n; ++i) {
      MatrixXd t = dk[u][i] + gam[u] * kk[i] - kk[i] * gam[u];
      for (int m = 0; m < n; ++m) t -= gam[u](m, i) * kk[m];
      out[u][i] = t;
    }
  return out;
}

// Derivation action of an endomorphism on a (1,3) tensor, all four slots.
inline Tensor13 endo_derivation(const MatrixXd& j, const Tensor13& t, int n) {
  Tensor13 out(n * n, MatrixXd::Zero(n, n));
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      MatrixXd m = j * t[a * n + b] - t[a * n + b] * j;
      for (int c = 0; c < n; ++c) {
        m -= j(c, a) * t[c * n + b];
        m -= j(c, b) * t[a * n + c];
      }
      out[a * n + b] = m;
    }
  return out;
}

inline double max_abs(const Tensor13& t) {
  double m = 0.0;
  for (const MatrixXd& e : t) m = std::max(m, e.cwiseAbs().maxCoeff());
  return m;
}

}  // namespace fd

inline IdentityReport check_identities(const ChartField& f, const VectorXd& p) {
  fd::require_interior(f, p, 4 * f.fd_step);
  const int n = f.dim;
  const CurvatureSample cs = curvature_tensors(f, p);
  const MatrixXd g = f.g_at(p);

  IdentityReport rep;
  rep.scale = std::max({1.0, fd::max_abs(cs.R), fd::max_abs(cs.Rbar),
                        fd::max_abs(cs.Rhat)});
  rep.tolerance = 100.0 * f.fd_step * f.fd_step * rep.scale;

  double dual = 0.0, sum = 0.0, skew = 0.0, req = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const MatrixXd lowR = g * cs.R[i * n + j];
      const MatrixXd lowRbar = g * cs.Rbar[i * n + j];
      dual = std::max(dual, (lowR + lowRbar.transpose()).cwiseAbs().maxCoeff());
      skew = std::max(skew, (lowR + lowR.transpose()).cwiseAbs().maxCoeff());
      sum = std::max(sum, (cs.R[i * n + j] + cs.Rbar[i * n + j] -
                           2.0 * cs.Rhat[i * n + j] -
                           2.0 * cs.bracketKK[i * n + j])
                              .cwiseAbs()
                              .maxCoeff());
      req = std::max(req, (cs.R[i * n + j] - cs.Rbar[i * n + j])
                              .cwiseAbs()
                              .maxCoeff());
    }
  rep.duality = dual;
  rep.sum_identity = sum;
  if (fd::max_abs(cs.R) <= rep.tolerance) {
    double hess = 0.0;
    for (int i = 0; i < n * n; ++i)
      hess = std::max(hess,
                      (cs.Rhat[i] + cs.bracketKK[i]).cwiseAbs().maxCoeff());
    rep.hessian_relation = hess;
  }

  // nabla-hat K symmetry
  {
    const auto nk = fd::nabla_hat_k(f, p);
    double asym = 0.0;
    for (int u = 0; u < n; ++u)
      for (int i = 0; i < n; ++i)
        asym = std::max(asym, (nk[u][i] - nk[i][u]).cwiseAbs().maxCoeff());
    rep.nabla_hat_k_symmetry = asym;
  }

  // second-Bianchi-type identity for R + Rbar
  {
    const auto kk = fd::k_components(f, p);
    Tensor13 diff(n * n);
    for (int i = 0; i < n * n; ++i) diff[i] = cs.Rbar[i] - cs.R[i];
    std::vector<Tensor13> kd(n);
    for (int u = 0; u < n; ++u) kd[u] = fd::endo_derivation(kk[u], diff, n);

    // covariant derivative of T = R + Rbar
    const auto gam = christoffel_hat(f, p);
    std::vector<Tensor13> dT(n);
    for (int u = 0; u < n; ++u) {
      VectorXd q = p;
      q[u] = p[u] + f.fd_step;
      const CurvatureSample plus = curvature_tensors(f, q);
      q[u] = p[u] - f.fd_step;
      const CurvatureSample minus = curvature_tensors(f, q);
      dT[u].resize(n * n);
      for (int i = 0; i < n * n; ++i)
        dT[u][i] = (plus.R[i] + plus.Rbar[i] - minus.R[i] - minus.Rbar[i]) /
                   (2 * f.fd_step);
    }
    std::vector<Tensor13> nt(n, Tensor13(n * n));
    Tensor13 t(n * n);
    for (int i = 0; i < n * n; ++i) t[i] = cs.R[i] + cs.Rbar[i];
    for (int u = 0; u < n; ++u)
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
          MatrixXd m = dT[u][a * n + b] + gam[u] * t[a * n + b] -
                       t[a * n + b] * gam[u];
          for (int c = 0; c < n; ++c) {
            m -= gam[u](c, a) * t[c * n + b];
            m -= gam[u](c, b) * t[a * n + c];
          }
          nt[u][a * n + b] = m;
        }

    double res = 0.0;
    for (int u = 0; u < n; ++u)
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y) {
          const MatrixXd lhs = nt[u][x * n + y] + nt[x][y * n + u] +
                               nt[y][u * n + x];
          const MatrixXd rhs = kd[u][x * n + y] + kd[x][y * n + u] +
                               kd[y][u * n + x];
          res = std::max(res, (lhs - rhs).cwiseAbs().maxCoeff());
        }
    rep.bianchi = res;
  }

  rep.r_equals_rbar = req <= rep.tolerance;
  rep.nabla_k_symmetric = rep.nabla_hat_k_symmetry <= rep.tolerance;
  rep.r_skew_in_zw = skew <= rep.tolerance;
  rep.lemma21_agree = (rep.r_equals_rbar == rep.nabla_k_symmetric) &&
                      (rep.nabla_k_symmetric == rep.r_skew_in_zw);
  return rep;
}

// ---- built-in analytic fields --------------------------------------------

inline MatrixXd default_box(int n, double lo, double hi) {
  MatrixXd d(n, 2);
  for (int i = 0; i < n; ++i) {
    d(i, 0) = lo;
    d(i, 1) = hi;
  }
  return d;
}

// Hessian structure from the potential phi = e^x + e^y + e^{x+y}: the
// statistical connection is the flat coordinate connection, so
// g = Hess phi and C = -phi'''/2.
inline ChartField hessian_exp_field(double fd_step = 1e-3) {
  ChartField f;
  f.dim = 2;
  f.fd_step = fd_step;
  f.domain = default_box(2, -1.0, 1.0);
  f.g_at = [](const VectorXd& p) {
    const double ex = std::exp(p[0]), ey = std::exp(p[1]),
                 exy = std::exp(p[0] + p[1]);
    MatrixXd g(2, 2);
    g << ex + exy, exy, exy, ey + exy;
    return g;
  };
  f.c_at = [](const VectorXd& p) {
    const double ex = std::exp(p[0]), ey = std::exp(p[1]),
                 exy = std::exp(p[0] + p[1]);
    SymCubic c(2);
    c.at(0, 0, 0) = -0.5 * (ex + exy);
    c.at(0, 0, 1) = -0.5 * exy;
    c.at(0, 1, 1) = -0.5 * exy;
    c.at(1, 1, 1) = -0.5 * (ey + exy);
    return c;
  };
  return f;
}

// Round sphere in stereographic coordinates, C = 0; hat-curvature +1.
inline ChartField sphere_field(double fd_step = 1e-3) {
  ChartField f;
  f.dim = 2;
  f.fd_step = fd_step;
  f.domain = default_box(2, -1.0, 1.0);
  f.g_at = [](const VectorXd& p) {
    const double s = 1.0 + p.squaredNorm();
    return MatrixXd(4.0 / (s * s) * MatrixXd::Identity(2, 2));
  };
  f.c_at = [](const VectorXd&) { return SymCubic(2); };
  return f;
}

inline ChartField constant_field(MatrixXd g, SymCubic c,
                                 double fd_step = 1e-3) {
  ChartField f;
  f.dim = static_cast<int>(g.rows());
  f.fd_step = fd_step;
  f.domain = default_box(f.dim, -1.0, 1.0);
  f.g_at = [g](const VectorXd&) { return g; };
  f.c_at = [c](const VectorXd&) { return c; };
  return f;
}

// ---- polynomial chart inputs ----------------------------------------------

struct Polynomial {
  struct Term {
    std::vector<int> exps;
    double coef = 0.0;
  };
  std::vector<Term> terms;

  double eval(const VectorXd& p) const {
    double s = 0.0;
    for (const Term& t : terms) {
      double v = t.coef;
      for (size_t i = 0; i < t.exps.size(); ++i)
        for (int e = 0; e < t.exps[i]; ++e) v *= p[static_cast<int>(i)];
      s += v;
    }
    return s;
  }
};

struct PolynomialChartSpec {
  int dim = 0;
  std::map<std::pair<int, int>, Polynomial> g_entries;      // empty => identity
  std::map<std::array<int, 3>, Polynomial> cubic_entries;   // canonical idx
  MatrixXd domain;
  double fd_step = 1e-3;

  ChartField make() const {
    ChartField f;
    f.dim = dim;
    f.fd_step = fd_step;
    f.domain = domain.size() ? domain : default_box(dim, -1.0, 1.0);
    const auto ge = g_entries;
    const int n = dim;
    f.g_at = [ge, n](const VectorXd& p) {
      MatrixXd g = MatrixXd::Identity(n, n);
      for (const auto& [idx, poly] : ge) {
        const double v = poly.eval(p);
        g(idx.first, idx.second) = v;
        g(idx.second, idx.first) = v;
      }
      return g;
    };
    const auto ce = cubic_entries;
    f.c_at = [ce, n](const VectorXd& p) {
      SymCubic c(n);
      for (const auto& [idx, poly] : ce) c.at(idx[0], idx[1], idx[2]) = poly.eval(p);
      return c;
    };
    return f;
  }
};

}  // namespace kcurv
