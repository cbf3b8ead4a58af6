#pragma once

// Univariate and tensor-product B-spline spaces.
//
// A space owns a knot vector and a degree. Open spaces live on a clamped knot
// vector over [0,1]. Periodic spaces live on a uniform knot vector that extends
// p spacings beyond each end of [0,1]; the first p basis functions are glued to
// the last p, so a raw basis index i maps to the degree of freedom i mod (n-p).
// Raw indices are still needed by geometry control nets, which are not periodic
// in x (the x-coordinate is the identity).

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbiga/errors.hpp"
#include "fbiga/quadrature.hpp"

namespace fbiga {

/// Gauss-Legendre points per knot span used by default for degree p.
inline int default_quad_points(int degree) { return degree + 1; }

enum class KnotKind { open, uniform_periodic };

class KnotVector {
 public:
  KnotVector(std::vector<double> knots, int degree, KnotKind kind)
      : knots_(std::move(knots)), degree_(degree), kind_(kind) {
    validate();
  }

  /// Clamped knot vector on [0,1] with n_elements uniform spans.
  static KnotVector open_uniform(int n_elements, int degree) {
    if (n_elements < 1) throw ArgumentError("open_uniform: need at least one element");
    if (degree < 1) throw ArgumentError("open_uniform: degree must be >= 1");
    std::vector<double> k;
    k.reserve(n_elements + 2 * degree + 1);
    for (int i = 0; i < degree; ++i) k.push_back(0.0);
    for (int e = 0; e <= n_elements; ++e) k.push_back(static_cast<double>(e) / n_elements);
    for (int i = 0; i < degree; ++i) k.push_back(1.0);
    return KnotVector(std::move(k), degree, KnotKind::open);
  }

  /// Equispaced knots on [0,1] extended by p spacings on each side.
  static KnotVector periodic_uniform(int n_elements, int degree) {
    if (n_elements < 1) throw ArgumentError("periodic_uniform: need at least one element");
    if (degree < 1) throw ArgumentError("periodic_uniform: degree must be >= 1");
    std::vector<double> k;
    k.reserve(n_elements + 2 * degree + 1);
    for (int m = -degree; m <= n_elements + degree; ++m)
      k.push_back(static_cast<double>(m) / n_elements);
    return KnotVector(std::move(k), degree, KnotKind::uniform_periodic);
  }

  const std::vector<double>& knots() const { return knots_; }
  double operator[](std::size_t i) const { return knots_[i]; }
  std::size_t size() const { return knots_.size(); }
  int degree() const { return degree_; }
  KnotKind kind() const { return kind_; }

  /// Number of B-splines defined by the knots (before any identification).
  int n_funcs() const { return static_cast<int>(knots_.size()) - degree_ - 1; }

  double lower() const { return knots_[degree_]; }
  double upper() const { return knots_[n_funcs()]; }

  /// Index s with knots[s] <= xi < knots[s+1], s in [p, n-1]; the right end
  /// of the domain belongs to the last non-empty span.
  int find_span(double xi) const {
    const int n = n_funcs();
    if (xi >= knots_[n]) {
      int s = n - 1;
      while (s > degree_ && knots_[s] == knots_[s + 1]) --s;
      return s;
    }
    auto it = std::upper_bound(knots_.begin() + degree_, knots_.begin() + n + 1, xi);
    return static_cast<int>(it - knots_.begin()) - 1;
  }

  /// Distinct knot values inside the parametric domain, i.e. element edges.
  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (int i = degree_; i <= n_funcs(); ++i)
      if (b.empty() || knots_[i] > b.back()) b.push_back(knots_[i]);
    return b;
  }

 private:
  void validate() const {
    if (degree_ < 1) throw ArgumentError("KnotVector: degree must be >= 1");
    if (static_cast<int>(knots_.size()) < 2 * degree_ + 2)
      throw ArgumentError("KnotVector: too few knots for degree " + std::to_string(degree_));
    for (std::size_t i = 1; i < knots_.size(); ++i)
      if (knots_[i] < knots_[i - 1]) throw ArgumentError("KnotVector: knots must be nondecreasing");

    const int n = n_funcs();
    if (kind_ == KnotKind::open) {
      for (int i = 0; i <= degree_; ++i) {
        if (knots_[i] != 0.0 || knots_[knots_.size() - 1 - i] != 1.0)
          throw ArgumentError("KnotVector: open knots must be clamped to 0 and 1");
      }
      if (knots_[degree_ + 1] == 0.0 || knots_[n - 1] == 1.0)
        throw ArgumentError("KnotVector: end knots must have multiplicity exactly p+1");
    } else {
      const double tau = knots_[1] - knots_[0];
      if (!(tau > 0.0)) throw ArgumentError("KnotVector: periodic knots must be strictly increasing");
      for (std::size_t i = 1; i < knots_.size(); ++i)
        if (std::abs(knots_[i] - knots_[i - 1] - tau) > 1e-12)
          throw ArgumentError("KnotVector: periodic knots must be equispaced");
      if (std::abs(knots_[degree_]) > 1e-12 || std::abs(knots_[n] - 1.0) > 1e-12)
        throw ArgumentError("KnotVector: periodic parametric interval must be [0,1]");
    }
    // interior multiplicity <= p
    int run = 1;
    for (int i = degree_ + 2; i < n; ++i) {
      run = (knots_[i] == knots_[i - 1]) ? run + 1 : 1;
      if (run > degree_) throw ArgumentError("KnotVector: interior knot multiplicity exceeds degree");
    }
  }

  std::vector<double> knots_;
  int degree_;
  KnotKind kind_;
};

/// Basis functions nonzero at a point and their derivatives.
///
/// Row d holds the d-th derivatives of the raw functions first..first+p.
struct BasisValues {
  int first = 0;
  int degree = 0;
  int n_derivs = 0;
  std::vector<double> table;  // (n_derivs+1) x (degree+1), row-major

  double operator()(int deriv, int k) const { return table[deriv * (degree + 1) + k]; }
  double& operator()(int deriv, int k) { return table[deriv * (degree + 1) + k]; }
  int count() const { return degree + 1; }
};

class UnivariateSplineSpace {
 public:
  UnivariateSplineSpace(KnotVector kv, bool periodic) : kv_(std::move(kv)), periodic_(periodic) {
    if (periodic_) {
      if (kv_.kind() != KnotKind::uniform_periodic)
        throw ArgumentError("UnivariateSplineSpace: periodic space needs a uniform periodic knot vector");
      if (kv_.n_funcs() <= 2 * kv_.degree())
        throw ArgumentError("UnivariateSplineSpace: periodic space needs n_funcs > 2p");
    }
    const auto b = kv_.breakpoints();
    for (std::size_t i = degree() + 1; i + degree() + 1 < kv_.size(); ++i) {
      if (kv_[i] == kv_[i - 1]) throw ArgumentError("UnivariateSplineSpace: interior knots must be simple");
    }
    n_elements_ = static_cast<int>(b.size()) - 1;
  }

  const KnotVector& knot_vector() const { return kv_; }
  int degree() const { return kv_.degree(); }
  bool periodic() const { return periodic_; }
  int n_funcs() const { return kv_.n_funcs(); }
  int dim() const { return periodic_ ? n_funcs() - degree() : n_funcs(); }
  int n_elements() const { return n_elements_; }
  std::vector<double> breakpoints() const { return kv_.breakpoints(); }

  /// Degree of freedom carrying raw basis function `raw`.
  int dof(int raw) const { return periodic_ ? raw % dim() : raw; }

 private:
  KnotVector kv_;
  bool periodic_;
  int n_elements_ = 0;
};

inline UnivariateSplineSpace build_open_space(int n_elements, int degree) {
  return UnivariateSplineSpace(KnotVector::open_uniform(n_elements, degree), false);
}

/// Periodic space of dimension n_funcs - degree with C^{p-1} seam at 0 == 1.
inline UnivariateSplineSpace build_periodic_space(int n_funcs, int degree) {
  if (degree < 1) throw ArgumentError("build_periodic_space: degree must be >= 1");
  if (n_funcs <= 2 * degree)
    throw ArgumentError("build_periodic_space: need n_funcs > 2p, got n_funcs=" + std::to_string(n_funcs));
  return UnivariateSplineSpace(KnotVector::periodic_uniform(n_funcs - degree, degree), true);
}

/// Periodic space with `n_elements` uniform spans on [0,1].
inline UnivariateSplineSpace build_periodic_space_elements(int n_elements, int degree) {
  return build_periodic_space(n_elements + degree, degree);
}

/// Cox-de Boor evaluation of the p+1 functions supported at xi together with
/// derivatives up to max_deriv (triangular table of knot differences).
inline BasisValues eval_basis(const UnivariateSplineSpace& space, double xi, int max_deriv) {
  const KnotVector& kv = space.knot_vector();
  const int p = kv.degree();
  if (max_deriv < 0 || max_deriv > p)
    throw ArgumentError("eval_basis: derivative order must be in [0, p]");
  const double lo = kv.lower(), hi = kv.upper();
  constexpr double slack = 1e-12;
  if (!(xi >= lo - slack && xi <= hi + slack))
    throw DomainError("eval_basis: xi=" + std::to_string(xi) + " outside parametric domain");
  xi = std::clamp(xi, lo, hi);

  const int s = kv.find_span(xi);
  const auto& U = kv.knots();

  // ndu: lower triangle holds knot differences, upper triangle basis values.
  std::vector<double> ndu((p + 1) * (p + 1)), left(p + 1), right(p + 1);
  auto N = [&](int r, int c) -> double& { return ndu[r * (p + 1) + c]; };
  N(0, 0) = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - U[s + 1 - j];
    right[j] = U[s + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      N(j, r) = right[r + 1] + left[j - r];
      const double tmp = N(j, r) == 0.0 ? 0.0 : N(r, j - 1) / N(j, r);
      N(r, j) = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    N(j, j) = saved;
  }

  BasisValues out;
  out.first = s - p;
  out.degree = p;
  out.n_derivs = max_deriv;
  out.table.assign((max_deriv + 1) * (p + 1), 0.0);
  for (int j = 0; j <= p; ++j) out(0, j) = N(j, p);

  std::vector<double> a(2 * (p + 1));
  auto A = [&](int row, int c) -> double& { return a[row * (p + 1) + c]; };
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    A(0, 0) = 1.0;
    for (int k = 1; k <= max_deriv; ++k) {
      double d = 0.0;
      const int rk = r - k, pk = p - k;
      if (r >= k) {
        A(s2, 0) = N(pk + 1, rk) == 0.0 ? 0.0 : A(s1, 0) / N(pk + 1, rk);
        d = A(s2, 0) * N(rk, pk);
      }
      const int j1 = rk >= -1 ? 1 : -rk;
      const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        const double den = N(pk + 1, rk + j);
        A(s2, j) = den == 0.0 ? 0.0 : (A(s1, j) - A(s1, j - 1)) / den;
        d += A(s2, j) * N(rk + j, pk);
      }
      if (r <= pk) {
        A(s2, k) = N(pk + 1, r) == 0.0 ? 0.0 : -A(s1, k - 1) / N(pk + 1, r);
        d += A(s2, k) * N(r, pk);
      }
      out(k, r) = d;
      std::swap(s1, s2);
    }
  }
  double fac = p;
  for (int k = 1; k <= max_deriv; ++k) {
    for (int j = 0; j <= p; ++j) out(k, j) *= fac;
    fac *= (p - k);
  }
  return out;
}

/// One abscissa per degree of freedom: the mean of the p knots interior to
/// each basis function's support. Periodic abscissae are wrapped into [0,1).
inline std::vector<double> greville_points(const UnivariateSplineSpace& space) {
  const auto& U = space.knot_vector().knots();
  const int p = space.degree();
  std::vector<double> g(space.dim());
  for (int i = 0; i < space.dim(); ++i) {
    double sum = 0.0;
    for (int k = 1; k <= p; ++k) sum += U[i + k];
    g[i] = sum / p;
  }
  if (space.periodic()) {
    for (double& x : g) {
      x -= std::floor(x);
      if (x >= 1.0 - 1e-14) x = 0.0;
    }
    std::sort(g.begin(), g.end());
  } else {
    g.front() = 0.0;
    g.back() = 1.0;
  }
  return g;
}

/// Expand dof coefficients to raw (unglued) coefficients.
inline Eigen::VectorXd expand_to_raw(const UnivariateSplineSpace& space, const Eigen::VectorXd& dof_coeffs) {
  if (dof_coeffs.size() != space.dim()) throw ArgumentError("expand_to_raw: coefficient size mismatch");
  Eigen::VectorXd raw(space.n_funcs());
  for (int i = 0; i < space.n_funcs(); ++i) raw[i] = dof_coeffs[space.dof(i)];
  return raw;
}

/// d-th derivative of sum_i c_i psi_i at t, c indexed by raw basis index.
inline double evaluate_raw(const UnivariateSplineSpace& space, const Eigen::VectorXd& raw_coeffs, double t,
                           int deriv = 0) {
  const BasisValues b = eval_basis(space, t, deriv);
  double v = 0.0;
  for (int k = 0; k < b.count(); ++k) v += raw_coeffs[b.first + k] * b(deriv, k);
  return v;
}

/// d-th derivative of sum_j c_j psi_j at t, c indexed by degree of freedom.
inline double evaluate(const UnivariateSplineSpace& space, const Eigen::VectorXd& dof_coeffs, double t,
                       int deriv = 0) {
  const BasisValues b = eval_basis(space, t, deriv);
  double v = 0.0;
  for (int k = 0; k < b.count(); ++k) v += dof_coeffs[space.dof(b.first + k)] * b(deriv, k);
  return v;
}

/// Dense collocation matrix B(i, j) = psi_j(points[i]) over degrees of freedom.
inline Eigen::MatrixXd collocation_matrix(const UnivariateSplineSpace& space, std::span<const double> points,
                                          int deriv = 0) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), space.dim());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const BasisValues b = eval_basis(space, points[i], deriv);
    for (int k = 0; k < b.count(); ++k) B(i, space.dof(b.first + k)) += b(deriv, k);
  }
  return B;
}

/// Interpolate `f` at `points` (one per degree of freedom).
inline Eigen::VectorXd interpolate(const std::function<double(double)>& f, const UnivariateSplineSpace& space,
                                   std::span<const double> points) {
  if (static_cast<int>(points.size()) != space.dim())
    throw ArgumentError("interpolate: need one point per degree of freedom");
  const Eigen::MatrixXd B = collocation_matrix(space, points);
  Eigen::VectorXd rhs(space.dim());
  for (int i = 0; i < space.dim(); ++i) rhs[i] = f(points[i]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  if (!lu.isInvertible()) throw NumericalError("interpolate: singular interpolation matrix");
  return lu.solve(rhs);
}

struct ProjectionOptions {
  /// Optional measure weight w(t) (e.g. arc length); defaults to 1.
  std::function<double(double)> weight;
  /// Open spaces only: keep the first and last coefficient at zero.
  bool pin_ends = false;
  /// Quadrature points per span; 0 selects default_quad_points(p).
  int quad_points = 0;
};

/// Weighted L2 projection onto the space; returns dof coefficients.
inline Eigen::VectorXd l2_project(const std::function<double(double)>& f, const UnivariateSplineSpace& space,
                                  const ProjectionOptions& opts = {}) {
  if (opts.pin_ends && space.periodic()) throw ArgumentError("l2_project: pin_ends requires an open space");
  const int p = space.degree();
  const int nq = opts.quad_points > 0 ? opts.quad_points : default_quad_points(p);
  const int n = space.dim();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const auto brk = space.breakpoints();
  for (std::size_t e = 0; e + 1 < brk.size(); ++e) {
    const QuadratureRule q = gauss_legendre(nq, brk[e], brk[e + 1]);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double t = q.points[k];
      const double w = q.weights[k] * (opts.weight ? opts.weight(t) : 1.0);
      const BasisValues b = eval_basis(space, t, 0);
      const double fv = f(t);
      for (int a = 0; a < b.count(); ++a) {
        const int ia = space.dof(b.first + a);
        rhs[ia] += w * fv * b(0, a);
        for (int c = 0; c < b.count(); ++c) gram(ia, space.dof(b.first + c)) += w * b(0, a) * b(0, c);
      }
    }
  }
  const int lo = opts.pin_ends ? 1 : 0;
  const int m = opts.pin_ends ? n - 2 : n;
  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(n);
  if (m <= 0) return coeffs;
  Eigen::LLT<Eigen::MatrixXd> llt(gram.block(lo, lo, m, m));
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-14)
    throw NumericalError("l2_project: Gram matrix is singular or badly conditioned");
  coeffs.segment(lo, m) = llt.solve(rhs.segment(lo, m));
  return coeffs;
}

struct TensorSplineSpace {
  UnivariateSplineSpace x;
  UnivariateSplineSpace y;

  TensorSplineSpace(UnivariateSplineSpace sx, UnivariateSplineSpace sy) : x(std::move(sx)), y(std::move(sy)) {
    if (x.degree() != y.degree()) throw ArgumentError("TensorSplineSpace: degrees must match");
  }
  int dim() const { return x.dim() * y.dim(); }
  int degree() const { return x.degree(); }
};

}  // namespace fbiga
