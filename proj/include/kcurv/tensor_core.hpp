// Dense representation of a statistical structure (g, C) on a small
// inner-product space, the derived difference tensor K, the bracket
// [K,K] and the sectional K-curvature.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace kcurv {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-10;
inline constexpr int kMaxDim = 16;

// Thrown on malformed input (dimension mismatch, bad JSON, violated
// preconditions). The CLI maps this to exit code 2.
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Thrown when a numerical procedure fails its contract (non-convergence,
// residual above tolerance). The CLI maps this to exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Symmetric positive definite bilinear form with a cached Cholesky factor.
// All raising/lowering and orthonormal frames go through the factor, never
// through an eigendecomposition, so results are deterministic.
class Metric {
 public:
  explicit Metric(MatrixXd gram) : gram_(std::move(gram)) {
    if (gram_.rows() != gram_.cols() || gram_.rows() < 1)
      throw validation_error("metric: gram matrix must be square and non-empty");
    if (gram_.rows() > kMaxDim)
      throw validation_error("metric: dimension exceeds supported maximum");
    const double scale = gram_.cwiseAbs().maxCoeff();
    if ((gram_ - gram_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw validation_error("metric: gram matrix is not symmetric");
    Eigen::LLT<MatrixXd> llt(gram_);
    if (llt.info() != Eigen::Success)
      throw validation_error("metric: gram matrix is not positive definite");
    chol_ = llt.matrixL();
    for (int i = 0; i < dim(); ++i)
      if (!(chol_(i, i) > 0.0))
        throw validation_error("metric: non-positive Cholesky pivot");
  }

  static Metric identity(int n) { return Metric(MatrixXd::Identity(n, n)); }

  int dim() const { return static_cast<int>(gram_.rows()); }
  const MatrixXd& gram() const { return gram_; }
  const MatrixXd& chol() const { return chol_; }
  bool is_identity() const { return gram_.isIdentity(0.0); }

  double inner(const VectorXd& u, const VectorXd& v) const {
    return u.dot(gram_ * v);
  }
  double norm(const VectorXd& u) const { return std::sqrt(inner(u, u)); }

  // g^{-1} w via the cached factor.
  VectorXd raise(const VectorXd& w) const {
    VectorXd y = chol_.triangularView<Eigen::Lower>().solve(w);
    return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
  }
  MatrixXd raise(const MatrixXd& w) const {
    MatrixXd y = chol_.triangularView<Eigen::Lower>().solve(w);
    return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
  }

  // Columns form a g-orthonormal frame: B = L^{-T}, so B^T g B = I.
  MatrixXd orthonormal_frame() const {
    return chol_.transpose().triangularView<Eigen::Upper>().solve(
        MatrixXd::Identity(dim(), dim()));
  }

 private:
  MatrixXd gram_;
  MatrixXd chol_;
};

// Totally symmetric cubic form stored packed on canonical indices
// i <= j <= k; symmetry holds by construction.
class SymCubic {
 public:
  explicit SymCubic(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim)
      throw validation_error("cubic: unsupported dimension");
    entries_.assign(packed_size(dim), 0.0);
  }

  static int packed_size(int n) { return n * (n + 1) * (n + 2) / 6; }

  int dim() const { return dim_; }
  const std::vector<double>& entries() const { return entries_; }

  // Canonical packed offset of (i, j, k) with i <= j <= k.
  int packed_index(int i, int j, int k) const {
    const int m = dim_ - i;
    // triples with first index < i, then pairs (j-i, k-i) in an m-block
    const int block =
        packed_size(dim_) - packed_size(m);
    const int a = j - i, b = k - i;
    return block + a * m - a * (a - 1) / 2 + (b - a);
  }

  double operator()(int i, int j, int k) const {
    sort3(i, j, k);
    return entries_[packed_index(i, j, k)];
  }

  double& at(int i, int j, int k) {
    sort3(i, j, k);
    return entries_[packed_index(i, j, k)];
  }

  double max_abs() const {
    double m = 0.0;
    for (double e : entries_) m = std::max(m, std::abs(e));
    return m;
  }

  double eval(const VectorXd& x, const VectorXd& y, const VectorXd& z) const {
    check_dim(x); check_dim(y); check_dim(z);
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k)
          s += (*this)(i, j, k) * x[i] * y[j] * z[k];
    return s;
  }

  // Covector C(., y, z).
  VectorXd contract2(const VectorXd& y, const VectorXd& z) const {
    check_dim(y); check_dim(z);
    VectorXd w = VectorXd::Zero(dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k)
          w[i] += (*this)(i, j, k) * y[j] * z[k];
    return w;
  }

  // Symmetric matrix A with A(a, b) = C(e_a, e_b, x).
  MatrixXd contract1(const VectorXd& x) const {
    check_dim(x);
    MatrixXd a = MatrixXd::Zero(dim_, dim_);
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        for (int k = 0; k < dim_; ++k)
          a(i, j) += (*this)(i, j, k) * x[k];
    return a;
  }

  // Pull back along a linear map: result(a,b,c) = C(B col_a, B col_b, B col_c).
  SymCubic transform(const MatrixXd& basis) const {
    if (basis.rows() != dim_)
      throw validation_error("cubic: transform dimension mismatch");
    const int m = static_cast<int>(basis.cols());
    SymCubic out(m);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        for (int k = j; k < m; ++k)
          out.at(i, j, k) = eval(basis.col(i), basis.col(j), basis.col(k));
    return out;
  }

 private:
  static void sort3(int& i, int& j, int& k) {
    if (i > j) std::swap(i, j);
    if (j > k) std::swap(j, k);
    if (i > j) std::swap(i, j);
  }
  void check_dim(const VectorXd& v) const {
    if (v.size() != dim_)
      throw validation_error("cubic: vector dimension mismatch");
  }

  int dim_;
  std::vector<double> entries_;
};

// Two linearly independent vectors spanning a plane.
struct Plane {
  VectorXd u;
  VectorXd v;
};

struct CurvatureLikeResiduals {
  double antisymmetry = 0.0;
  double bianchi = 0.0;
  double skewness = 0.0;
  double scale = 0.0;  // max |[K,K]| entry
};

// Pair (g, C); K is derived on demand through the metric factorization.
class StatStructure {
 public:
  StatStructure(Metric metric, SymCubic cubic)
      : metric_(std::move(metric)), cubic_(std::move(cubic)) {
    if (metric_.dim() != cubic_.dim())
      throw validation_error("structure: metric/cubic dimension mismatch");
  }

  int dim() const { return metric_.dim(); }
  const Metric& metric() const { return metric_; }
  const SymCubic& cubic() const { return cubic_; }

  // K(y, z) = g^{-1} C(., y, z)
  VectorXd k_from_c(const VectorXd& y, const VectorXd& z) const {
    if (y.size() != dim() || z.size() != dim())
      throw validation_error("k_from_c: dimension mismatch");
    return metric_.raise(cubic_.contract2(y, z));
  }

  // Matrix of the endomorphism K_x in the standard basis.
  MatrixXd k_operator(const VectorXd& x) const {
    if (x.size() != dim())
      throw validation_error("k_operator: dimension mismatch");
    return metric_.raise(cubic_.contract1(x));
  }

  VectorXd bracket_kk(const VectorXd& x, const VectorXd& y,
                      const VectorXd& z) const {
    const MatrixXd kx = k_operator(x), ky = k_operator(y);
    return kx * (ky * z) - ky * (kx * z);
  }

  // g-orthonormalizes the spanning pair by modified Gram-Schmidt and
  // evaluates g([K,K](X,Y)Y, X).
  double sectional_k_curvature(const Plane& p) const {
    if (p.u.size() != dim() || p.v.size() != dim())
      throw validation_error("sectional_k_curvature: dimension mismatch");
    const double uu = metric_.inner(p.u, p.u);
    const double vv = metric_.inner(p.v, p.v);
    const double uv = metric_.inner(p.u, p.v);
    if (uu * vv - uv * uv <= 1e-12 * uu * vv)
      throw validation_error("sectional_k_curvature: degenerate plane");
    const VectorXd x = p.u / std::sqrt(uu);
    VectorXd w = p.v - metric_.inner(p.v, x) * x;
    const VectorXd y = w / metric_.norm(w);
    return metric_.inner(bracket_kk(x, y, y), x);
  }

  CurvatureLikeResiduals curvature_like_residuals() const {
    const int n = dim();
    std::vector<MatrixXd> kop(n);
    for (int i = 0; i < n; ++i)
      kop[i] = k_operator(VectorXd::Unit(n, i));
    std::vector<MatrixXd> br(n * n);
    CurvatureLikeResiduals r;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        br[i * n + j] = kop[i] * kop[j] - kop[j] * kop[i];
        r.scale = std::max(r.scale, br[i * n + j].cwiseAbs().maxCoeff());
      }
    const MatrixXd& g = metric_.gram();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        r.antisymmetry = std::max(
            r.antisymmetry, (br[i * n + j] + br[j * n + i]).cwiseAbs().maxCoeff());
        for (int k = 0; k < n; ++k) {
          const VectorXd cyc = br[i * n + j].col(k) + br[j * n + k].col(i) +
                               br[k * n + i].col(j);
          r.bianchi = std::max(r.bianchi, cyc.cwiseAbs().maxCoeff());
        }
        const MatrixXd low = g * br[i * n + j];  // g([K,K](e_i,e_j) . , .)
        r.skewness =
            std::max(r.skewness, (low + low.transpose()).cwiseAbs().maxCoeff());
      }
    return r;
  }

  // E = tr_g K, computed over the frame from the metric factorization.
  VectorXd trace_vector() const {
    const MatrixXd frame = metric_.orthonormal_frame();
    VectorXd e = VectorXd::Zero(dim());
    for (int i = 0; i < dim(); ++i)
      e += k_from_c(frame.col(i), frame.col(i));
    return e;
  }

  bool is_trace_free(double tol = kDefaultTol) const {
    if (!(tol > 0)) throw validation_error("is_trace_free: tol must be > 0");
    return metric_.norm(trace_vector()) <= tol * (1.0 + cubic_.max_abs());
  }

  // g-orthonormal frame of {e1}^perp, built deterministically by appending
  // standard basis vectors and running g-Gram-Schmidt.
  MatrixXd complement_frame(const VectorXd& e1) const {
    const int n = dim();
    if (std::abs(metric_.norm(e1) - 1.0) > 1e-8)
      throw validation_error("complement_frame: e1 is not g-unit");
    std::vector<VectorXd> frame{e1};
    for (int i = 0; i < n && static_cast<int>(frame.size()) < n; ++i) {
      VectorXd w = VectorXd::Unit(n, i);
      for (const VectorXd& f : frame) w -= metric_.inner(w, f) * f;
      // second pass stabilizes near-dependent candidates
      for (const VectorXd& f : frame) w -= metric_.inner(w, f) * f;
      const double nw = metric_.norm(w);
      if (nw > 1e-8) frame.push_back(w / nw);
    }
    if (static_cast<int>(frame.size()) != n)
      throw numerical_error("complement_frame: failed to complete basis");
    MatrixXd out(n, n - 1);
    for (int i = 1; i < n; ++i) out.col(i - 1) = frame[i];
    return out;
  }

  // Induced structure on {e1}^perp: identity metric in the complement frame,
  // cubic restricted to it. The frame used is returned alongside.
  std::pair<StatStructure, MatrixXd> project_k(const VectorXd& e1) const {
    if (dim() < 2)
      throw validation_error("project_k: no orthogonal complement in dim 1");
    if (std::abs(metric_.norm(e1) - 1.0) > kDefaultTol)
      throw validation_error("project_k: e1 is not g-unit");
    const MatrixXd d = complement_frame(e1);
    return {StatStructure(Metric::identity(dim() - 1), cubic_.transform(d)), d};
  }

 private:
  Metric metric_;
  SymCubic cubic_;
};

}  // namespace kcurv
