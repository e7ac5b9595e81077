// Maximization of Phi(X) = C(X,X,X) on the g-unit sphere, critical point
// classification by the first/second derivative conditions, and tracking of
// critical frames along one-parameter families via Newton continuation on
// the Lagrange system.
#pragma once

#include <array>
#include <functional>
#include <limits>
#include <optional>
#include <random>

#include "kcurv/tensor_core.hpp"

namespace kcurv {

enum class CritKind { strict_max, degenerate_max, saddle, min_like };

inline const char* to_string(CritKind k) {
  switch (k) {
    case CritKind::strict_max: return "strict_max";
    case CritKind::degenerate_max: return "degenerate_max";
    case CritKind::saddle: return "saddle";
    case CritKind::min_like: return "min_like";
  }
  return "?";
}

struct CriticalPoint {
  VectorXd x;
  double value = 0.0;       // Phi(x)
  double multiplier = 0.0;  // Lagrange multiplier, (3/2) Phi(x)
  CritKind kind = CritKind::degenerate_max;
  double gap = 0.0;  // value - 2 * max secondary eigenvalue
};

struct FramePath {
  std::vector<double> ts;
  std::vector<CriticalPoint> points;
  std::vector<double> residuals;
};

inline double phi(const StatStructure& s, const VectorXd& x) {
  if (std::abs(s.metric().norm(x) - 1.0) > 1e-8)
    throw validation_error("phi: x is not g-unit");
  return s.cubic().eval(x, x, x);
}

// Taylor data of t -> Phi(cos t u + sin t w) at t = 0 for a g-orthonormal
// pair, via the closed forms in C.
inline std::array<double, 4> derivative_profile(const StatStructure& s,
                                                const VectorXd& u,
                                                const VectorXd& w) {
  const Metric& g = s.metric();
  if (std::abs(g.norm(u) - 1.0) > 1e-8 || std::abs(g.norm(w) - 1.0) > 1e-8 ||
      std::abs(g.inner(u, w)) > 1e-8)
    throw validation_error("derivative_profile: (u, w) not g-orthonormal");
  const SymCubic& c = s.cubic();
  const double cuuu = c.eval(u, u, u);
  const double cuuw = c.eval(u, u, w);
  const double cuww = c.eval(u, w, w);
  const double cwww = c.eval(w, w, w);
  return {cuuu, 3.0 * cuuw, 3.0 * (2.0 * cuww - cuuu),
          3.0 * (-7.0 * cuuw + 2.0 * cwww)};
}

namespace detail {

// Eigenvalues of K_x restricted to the g-orthogonal complement of x,
// descending.
inline VectorXd secondary_eigenvalues(const StatStructure& s,
                                      const VectorXd& x, MatrixXd* vectors) {
  const MatrixXd w = s.complement_frame(x);
  const MatrixXd m = w.transpose() * s.metric().gram() * s.k_operator(x) * w;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
  VectorXd ev = es.eigenvalues().reverse();
  if (vectors) {
    *vectors = MatrixXd(x.size(), w.cols());
    for (int j = 0; j < w.cols(); ++j)
      vectors->col(j) = w * es.eigenvectors().col(w.cols() - 1 - j);
  }
  return ev;
}

}  // namespace detail

// Builds a classified critical point at x; x must satisfy the first-order
// condition K(x,x) = Phi(x) x up to the stated residual bound.
inline CriticalPoint classify_critical_point(const StatStructure& s,
                                             const VectorXd& x) {
  CriticalPoint cp;
  cp.x = x;
  cp.value = phi(s, x);
  cp.multiplier = 1.5 * cp.value;
  const VectorXd kxx = s.k_from_c(x, x);
  const double res = s.metric().norm(kxx - cp.value * x);
  if (res > 1e-8 * (1.0 + std::abs(cp.value)))
    throw numerical_error("critical point residual too large: " +
                          std::to_string(res));
  if (s.dim() == 1) {
    cp.kind = CritKind::strict_max;
    cp.gap = std::abs(cp.value);
    return cp;
  }
  const VectorXd ev = detail::secondary_eigenvalues(s, x, nullptr);
  const double eps = 1e-7 * (1.0 + std::abs(cp.value));
  const double hi = 2.0 * ev[0] - cp.value;
  const double lo = 2.0 * ev[ev.size() - 1] - cp.value;
  cp.gap = cp.value - 2.0 * ev[0];
  if (hi < -eps)
    cp.kind = CritKind::strict_max;
  else if (hi <= eps)
    cp.kind = CritKind::degenerate_max;
  else if (lo > eps)
    cp.kind = CritKind::min_like;
  else
    cp.kind = CritKind::saddle;
  return cp;
}

namespace detail {

// Shifted fixed-point ascent in g-orthonormal coordinates; the cubic passed
// here already lives in identity-metric coordinates.
inline std::optional<VectorXd> power_iterate(const SymCubic& c, VectorXd x,
                                             double shift, int max_iters,
                                             double step_tol) {
  x.normalize();
  for (int it = 0; it < max_iters; ++it) {
    VectorXd next = c.contract2(x, x) + shift * x;
    const double nn = next.norm();
    if (!(nn > 0) || !std::isfinite(nn)) return std::nullopt;
    next /= nn;
    if ((next - x).norm() <= step_tol) return next;
    x = next;
  }
  return std::nullopt;
}

inline bool lex_less(const VectorXd& a, const VectorXd& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace detail

// Runs the shifted iteration from a single start vector and classifies the
// limit. Throws numerical_error if the run does not converge.
inline CriticalPoint find_local_max_from(const StatStructure& s,
                                         const VectorXd& x0) {
  const MatrixXd frame = s.metric().orthonormal_frame();
  const bool ident = s.metric().is_identity();
  const SymCubic c = ident ? s.cubic() : s.cubic().transform(frame);
  const double shift = 1.0 + 3.0 * s.dim() * c.max_abs();
  // frame = L^{-T}, so coordinates are recovered by L^T
  VectorXd c0 = ident ? x0 : VectorXd(s.metric().chol().transpose() * x0);
  auto lim = detail::power_iterate(c, c0, shift, 10000, 1e-12);
  if (!lim) throw numerical_error("find_local_max_from: no convergence");
  VectorXd x = ident ? *lim : VectorXd(frame * *lim);
  x /= s.metric().norm(x);
  return classify_critical_point(s, x);
}

// Multi-start maximization: `starts` seeded random unit vectors plus the
// +/- standard basis directions; returns the converged point with largest
// Phi, ties broken by lexicographic order of the coordinate vector.
inline CriticalPoint find_local_max(const StatStructure& s, int starts = 16,
                                    std::uint64_t seed = 0) {
  if (starts < 1) throw validation_error("find_local_max: starts must be >= 1");
  const int n = s.dim();
  const MatrixXd frame = s.metric().orthonormal_frame();
  const bool ident = s.metric().is_identity();
  const SymCubic c = ident ? s.cubic() : s.cubic().transform(frame);
  const double shift = 1.0 + 3.0 * n * c.max_abs();

  std::vector<VectorXd> inits;
  for (int i = 0; i < n; ++i) {
    inits.push_back(VectorXd::Unit(n, i));
    inits.push_back(-VectorXd::Unit(n, i));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < starts; ++r) {
    VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    if (v.norm() < 1e-12) v = VectorXd::Unit(n, 0);
    inits.push_back(v.normalized());
  }

  std::optional<VectorXd> best;
  double best_val = -std::numeric_limits<double>::infinity();
  double best_res = std::numeric_limits<double>::infinity();
  for (const VectorXd& x0 : inits) {
    auto lim = detail::power_iterate(c, x0, shift, 10000, 1e-12);
    if (!lim) {
      best_res = std::min(best_res, 1.0);
      continue;
    }
    const double val = c.eval(*lim, *lim, *lim);
    if (!best || val > best_val + 1e-14 ||
        (std::abs(val - best_val) <= 1e-14 && detail::lex_less(*best, *lim))) {
      best = *lim;
      best_val = val;
    }
  }
  if (!best)
    throw numerical_error("find_local_max: no start converged (best residual " +
                          std::to_string(best_res) + ")");
  VectorXd x = ident ? *best : VectorXd(frame * *best);
  x /= s.metric().norm(x);
  CriticalPoint cp = classify_critical_point(s, x);
  // Sign normalization is only meaningful when it preserves the value,
  // i.e. at numerically zero maxima; Phi(-x) = -Phi(x) otherwise.
  if (std::abs(cp.value) <= 1e-12 * (1.0 + s.cubic().max_abs())) {
    for (int i = 0; i < n; ++i) {
      if (std::abs(cp.x[i]) > 1e-12) {
        if (cp.x[i] < 0) cp.x = -cp.x;
        break;
      }
    }
  }
  return cp;
}

// Exhaustive angular-grid search oracle, dims 1..3 only.
inline std::pair<VectorXd, double> grid_oracle_max(const StatStructure& s,
                                                   int resolution) {
  const int n = s.dim();
  if (n > 3) throw validation_error("grid_oracle_max: dim must be <= 3");
  if (resolution < 2) throw validation_error("grid_oracle_max: resolution too small");
  const MatrixXd frame = s.metric().orthonormal_frame();
  const bool ident = s.metric().is_identity();
  const SymCubic c = ident ? s.cubic() : s.cubic().transform(frame);

  VectorXd best;
  double best_val = -std::numeric_limits<double>::infinity();
  auto consider = [&](const VectorXd& v) {
    const double val = c.eval(v, v, v);
    if (val > best_val) {
      best_val = val;
      best = v;
    }
  };
  if (n == 1) {
    consider(VectorXd::Constant(1, 1.0));
    consider(VectorXd::Constant(1, -1.0));
  } else if (n == 2) {
    VectorXd v(2);
    for (int i = 0; i < resolution; ++i) {
      const double t = 2.0 * M_PI * i / resolution;
      v << std::cos(t), std::sin(t);
      consider(v);
    }
  } else {
    // Direct evaluation of the degree-3 polynomial in (theta, phi); kept
    // allocation-free, this loop dominates the oracle's cost.
    double e[10];
    int pos = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j)
        for (int k = j; k < 3; ++k) {
          const double mult = (i == j && j == k) ? 1.0 : (i == j || j == k) ? 3.0 : 6.0;
          e[pos++] = mult * c(i, j, k);
        }
    double bx = 0, by = 0, bz = 1;
    for (int a = 0; a <= resolution; ++a) {
      const double th = M_PI * a / resolution;
      const double st = std::sin(th), ct = std::cos(th);
      for (int b = 0; b < resolution; ++b) {
        const double ph = 2.0 * M_PI * b / resolution;
        const double x = st * std::cos(ph), y = st * std::sin(ph), z = ct;
        // packed order: 000 001 002 011 012 022 111 112 122 222
        const double val = e[0] * x * x * x + e[1] * x * x * y + e[2] * x * x * z +
                           e[3] * x * y * y + e[4] * x * y * z + e[5] * x * z * z +
                           e[6] * y * y * y + e[7] * y * y * z + e[8] * y * z * z +
                           e[9] * z * z * z;
        if (val > best_val) {
          best_val = val;
          bx = x; by = y; bz = z;
        }
      }
    }
    best = VectorXd(3);
    best << bx, by, bz;
  }
  VectorXd x = ident ? best : VectorXd(frame * best);
  x /= s.metric().norm(x);
  return {x, best_val};
}

struct Eigenframe {
  MatrixXd basis;        // columns, e1 first
  VectorXd eigenvalues;  // lambda_1 first, then descending
};

// g-orthonormal eigenbasis of K_{e1} with e1 first.
inline Eigenframe eigenframe_at(const StatStructure& s,
                                const CriticalPoint& e1) {
  const VectorXd kxx = s.k_from_c(e1.x, e1.x);
  if (s.metric().norm(kxx - e1.value * e1.x) >
      1e-8 * (1.0 + std::abs(e1.value)))
    throw validation_error("eigenframe_at: first-order residual too large");
  Eigenframe f;
  f.basis = MatrixXd(s.dim(), s.dim());
  f.eigenvalues = VectorXd(s.dim());
  f.basis.col(0) = e1.x;
  f.eigenvalues[0] = e1.value;
  if (s.dim() > 1) {
    MatrixXd vecs;
    const VectorXd ev = detail::secondary_eigenvalues(s, e1.x, &vecs);
    for (int j = 1; j < s.dim(); ++j) {
      f.basis.col(j) = vecs.col(j - 1);
      f.eigenvalues[j] = ev[j - 1];
    }
  }
  return f;
}

struct QuarterBound {
  double k = 0.0;
  double bound = 0.0;
  bool strict = false;
};

// k(e1 ^ x) against lambda_1^2 / 4; in the equality case verifies the
// eigenvector characterization.
inline QuarterBound quarter_bound_check(const StatStructure& s,
                                        const CriticalPoint& e1,
                                        const VectorXd& x) {
  const Metric& g = s.metric();
  if (std::abs(g.norm(x) - 1.0) > 1e-8 || std::abs(g.inner(x, e1.x)) > 1e-8)
    throw validation_error("quarter_bound_check: x must be unit and orthogonal to e1");
  QuarterBound qb;
  qb.k = s.sectional_k_curvature({e1.x, x});
  qb.bound = e1.value * e1.value / 4.0;
  const double eps = 1e-7 * (1.0 + qb.bound);
  qb.strict = qb.k < qb.bound - eps;
  if (std::abs(qb.k - qb.bound) <= eps) {
    const VectorXd r = s.k_operator(e1.x) * x - 0.5 * e1.value * x;
    if (g.norm(r) > 1e-6)
      throw numerical_error("quarter_bound_check: equality without half-eigenvalue eigenvector");
  }
  return qb;
}

namespace detail {

// Lagrange system F(y, lambda) = (3 C(., y, y) - 2 lambda g y, y^T g y - 1).
inline VectorXd lagrange_f(const StatStructure& s, const VectorXd& y,
                           double lambda) {
  const int n = s.dim();
  VectorXd f(n + 1);
  f.head(n) = 3.0 * s.cubic().contract2(y, y) - 2.0 * lambda * (s.metric().gram() * y);
  f[n] = y.dot(s.metric().gram() * y) - 1.0;
  return f;
}

inline MatrixXd lagrange_jacobian(const StatStructure& s, const VectorXd& y,
                                  double lambda) {
  const int n = s.dim();
  MatrixXd j = MatrixXd::Zero(n + 1, n + 1);
  j.topLeftCorner(n, n) =
      6.0 * s.cubic().contract1(y) - 2.0 * lambda * s.metric().gram();
  const VectorXd gy = s.metric().gram() * y;
  j.block(0, n, n, 1) = -2.0 * gy;
  j.block(n, 0, 1, n) = 2.0 * gy.transpose();
  return j;
}

inline bool newton_refine(const StatStructure& s, VectorXd& y, double& lambda,
                          double tol, int max_iters) {
  for (int it = 0; it < max_iters; ++it) {
    const VectorXd f = lagrange_f(s, y, lambda);
    if (f.cwiseAbs().maxCoeff() <= tol) return true;
    Eigen::PartialPivLU<MatrixXd> lu(lagrange_jacobian(s, y, lambda));
    const VectorXd step = lu.solve(f);
    if (!step.allFinite()) return false;
    y -= step.head(s.dim());
    lambda -= step[s.dim()];
  }
  return lagrange_f(s, y, lambda).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace detail

// Newton continuation of a critical frame along t in [0, 1]; `family` must
// be smooth in t and `start` a strict local maximum of family(0).
inline FramePath track_critical_frame(
    const std::function<StatStructure(double)>& family, int steps,
    const CriticalPoint& start) {
  if (steps < 1) throw validation_error("track_critical_frame: steps must be >= 1");
  if (start.kind != CritKind::strict_max)
    throw validation_error("track_critical_frame: start must be a strict maximum");
  constexpr double kResTol = 1e-10;
  constexpr double kMinStep = 1e-4;

  const StatStructure s0 = family(0.0);
  VectorXd y = start.x;
  double lambda = start.multiplier;
  {
    Eigen::FullPivLU<MatrixXd> lu(detail::lagrange_jacobian(s0, y, lambda));
    if (!lu.isInvertible())
      throw validation_error("track_critical_frame: singular Jacobian at start");
  }
  if (!detail::newton_refine(s0, y, lambda, kResTol, 50))
    throw numerical_error("track_critical_frame: start refinement failed");

  FramePath path;
  auto record = [&](double t, const StatStructure& s) {
    path.ts.push_back(t);
    path.points.push_back(classify_critical_point(s, y));
    path.residuals.push_back(
        detail::lagrange_f(s, y, lambda).cwiseAbs().maxCoeff());
  };
  record(0.0, s0);

  double t = 0.0;
  for (int i = 1; i <= steps; ++i) {
    const double target = static_cast<double>(i) / steps;
    while (t < target) {
      double dt = target - t;
      for (;;) {
        const double tn = t + dt;
        const StatStructure sn = family(tn);
        VectorXd yn = y;
        double ln = lambda;
        if (detail::newton_refine(sn, yn, ln, kResTol, 50) &&
            sn.metric().inner(y, yn) > 0) {
          y = yn;
          lambda = ln;
          t = tn;
          break;
        }
        dt *= 0.5;
        if (dt < kMinStep)
          throw numerical_error(
              "track_critical_frame: step underflow, last good t = " +
              std::to_string(t));
      }
    }
    record(target, family(target));
  }
  return path;
}

}  // namespace kcurv
