#pragma once

// Collocation of the strong form of one quasi-Newton step:
//
//   -Δu = f                                    interior points
//   ∇u·n + (K_H/g) u = g + K_H h0/g            points on the free boundary
//   u = h                                      lateral points (Dirichlet sides)
//
// The bottom row is lifted, so no point is placed on y = 0. The boundary
// update w = (h0 - u)/g is then interpolated at the free-boundary abscissae.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "fbiga/assembly_galerkin.hpp"
#include "fbiga/discretization.hpp"
#include "fbiga/errors.hpp"
#include "fbiga/geometry.hpp"
#include "fbiga/problem.hpp"
#include "fbiga/spline_core.hpp"

namespace fbiga {

enum class PointStrategy { greville, csp };

inline const char* to_string(PointStrategy s) { return s == PointStrategy::greville ? "greville" : "csp"; }

struct CollocationPointSet {
  PointStrategy strategy = PointStrategy::greville;
  std::vector<Vec2> interior;  // parametric (xi, eta)
  std::vector<double> top;     // parametric xi on eta = 1
  std::vector<Vec2> lateral;   // parametric (xi, eta), xi in {0, 1}

  std::size_t size() const { return interior.size() + top.size() + lateral.size(); }
};

namespace detail {

/// Bernoulli polynomial B_n(t) from the explicit sum over Bernoulli numbers.
inline double bernoulli_polynomial(int n, double t) {
  static constexpr double numbers[] = {1.0,        -0.5, 1.0 / 6, 0.0, -1.0 / 30, 0.0, 1.0 / 42,
                                       0.0,        -1.0 / 30, 0.0, 5.0 / 66, 0.0, -691.0 / 2730};
  if (n < 0 || n > 12) throw ArgumentError("bernoulli_polynomial: order out of range");
  double sum = 0.0, binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    sum += binom * numbers[k] * std::pow(t, n - k);
    binom = binom * (n - k) / (k + 1);
  }
  return sum;
}

/// Reference positions in (0, 1/2) and (1/2, 1) where the second derivative of
/// the Galerkin solution superconverges on uniform maximal-regularity meshes
/// of odd degree p: the two roots of B_{p-1} in (0, 1).
inline std::pair<double, double> superconvergent_pair(int degree) {
  const int n = degree - 1;
  double lo = 0.0, hi = 0.5;
  double flo = bernoulli_polynomial(n, lo);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bernoulli_polynomial(n, mid);
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  const double r = 0.5 * (lo + hi);
  return {r, 1.0 - r};
}

/// `count` superconvergent abscissae strictly inside the domain of the space:
/// the left point of every element, plus the right point of the elements
/// nearest to the ends (last, first, second to last, ...) for the remainder.
/// The extra points cluster at the boundary.
inline std::vector<double> csp_points(const UnivariateSplineSpace& space, int count) {
  const int p = space.degree();
  if (p % 2 == 0) throw UnsupportedError("csp collocation points are only defined for odd degree, got p = " +
                                         std::to_string(p));
  const auto brk = space.breakpoints();
  const int ne = static_cast<int>(brk.size()) - 1;
  const int extra = count - ne;
  if (extra < 0 || extra > ne)
    throw UnsupportedError("csp collocation points: mesh with " + std::to_string(ne) +
                           " elements cannot host " + std::to_string(count) + " points");
  const auto [a, b] = superconvergent_pair(p);
  std::vector<bool> both(ne, false);
  for (int k = 0; k < extra; ++k) both[k % 2 == 0 ? ne - 1 - k / 2 : k / 2] = true;
  std::vector<double> pts;
  for (int e = 0; e < ne; ++e) {
    const double h = brk[e + 1] - brk[e];
    pts.push_back(brk[e] + a * h);
    if (both[e]) pts.push_back(brk[e] + b * h);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

/// Abscissae strictly inside (0,1) for an open space: dim - 2 of them.
inline std::vector<double> open_interior_points(const UnivariateSplineSpace& s, PointStrategy strategy) {
  if (strategy == PointStrategy::csp) return csp_points(s, s.dim() - 2);
  auto g = greville_points(s);
  return {g.begin() + 1, g.end() - 1};
}

/// One abscissa per degree of freedom of a periodic space.
inline std::vector<double> periodic_points(const UnivariateSplineSpace& s, PointStrategy strategy) {
  if (strategy == PointStrategy::csp) return csp_points(s, s.dim());
  return greville_points(s);
}

}  // namespace detail

/// Tensor-product collocation points, bottom row excluded.
inline CollocationPointSet collocation_points(PointStrategy strategy, const UnivariateSplineSpace& space_x,
                                              const UnivariateSplineSpace& space_y, BcKind bc_kind) {
  if (space_x.degree() < 2 || space_y.degree() < 2)
    throw ArgumentError("collocation_points: collocation needs degree >= 2");
  if (space_y.periodic()) throw ArgumentError("collocation_points: y-space must be open");
  if (space_x.periodic() != (bc_kind == BcKind::periodic_lateral))
    throw ArgumentError("collocation_points: x-space periodicity does not match the lateral condition");

  CollocationPointSet P;
  P.strategy = strategy;
  const std::vector<double> xs = space_x.periodic() ? detail::periodic_points(space_x, strategy)
                                                    : detail::open_interior_points(space_x, strategy);
  const std::vector<double> ys = detail::open_interior_points(space_y, strategy);

  for (double eta : ys)
    for (double xi : xs) P.interior.emplace_back(xi, eta);
  P.top = xs;
  if (bc_kind == BcKind::dirichlet_lateral) {
    std::vector<double> side = ys;
    side.push_back(1.0);
    for (double xi : {0.0, 1.0})
      for (double eta : side) P.lateral.emplace_back(xi, eta);
  }
  const int free_dofs = space_x.dim() * (space_y.dim() - 1);
  if (static_cast<int>(P.size()) != free_dofs)
    throw std::logic_error("collocation_points: " + std::to_string(P.size()) + " points for " +
                           std::to_string(free_dofs) + " free dofs");
  return P;
}

namespace detail {

/// Physical Laplacian of every local basis function at a point, through the
/// full second-order chain rule (geometry Hessian included).
inline void physical_laplacians(const MapEval& m, const FieldBasis& fb, std::vector<double>& lap) {
  const Mat2 jinv = m.jacobian.inverse();
  const Mat2 jinv_t = jinv.transpose();
  lap.resize(fb.count());
  int k = 0;
  for (int b = 0; b < fb.by.count(); ++b) {
    for (int a = 0; a < fb.bx.count(); ++a, ++k) {
      const Vec2 gref(fb.bx(1, a) * fb.by(0, b), fb.bx(0, a) * fb.by(1, b));
      Mat2 href;
      href(0, 0) = fb.bx(2, a) * fb.by(0, b);
      href(0, 1) = href(1, 0) = fb.bx(1, a) * fb.by(1, b);
      href(1, 1) = fb.bx(0, a) * fb.by(2, b);
      const Vec2 gphys = jinv_t * gref;
      const Mat2 hphys = jinv_t * (href - gphys.x() * m.hessian[0] - gphys.y() * m.hessian[1]) * jinv;
      lap[k] = hphys.trace();
    }
  }
}

}  // namespace detail

/// Square collocation system over the free field dofs (bottom row lifted).
inline DiscreteSystem assemble_collocated(const GeoMap& geo, const ProblemData& problem,
                                          const CollocationPointSet& points) {
  const TensorSplineSpace& space = geo.space();
  DofLayout L = make_layout(geo, problem, false);
  const int n = L.n_free();
  if (static_cast<int>(points.size()) != n)
    throw NumericalError("collocation (" + std::string(to_string(points.strategy)) + "): " +
                         std::to_string(points.size()) + " points for " + std::to_string(n) + " unknowns");

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  int row = 0;
  auto put = [&](int g, double value) {
    const int c = L.free_index[g];
    if (c >= 0)
      trip.emplace_back(row, c, value);
    else
      rhs[row] -= value * L.lifted[g];
  };
  auto global = [&](const FieldBasis& fb, int a, int b) {
    return L.global(space.x.dof(fb.bx.first + a), space.y.dof(fb.by.first + b));
  };

  std::vector<double> lap;
  for (const Vec2& z : points.interior) {
    const MapEval m = eval_map(geo, z.x(), z.y(), 2);
    const FieldBasis fb = field_basis(space, z.x(), z.y(), 2);
    detail::physical_laplacians(m, fb, lap);
    rhs[row] += problem.f(m.point);
    int k = 0;
    for (int b = 0; b < fb.by.count(); ++b)
      for (int a = 0; a < fb.bx.count(); ++a, ++k) put(global(fb, a, b), -lap[k]);
    ++row;
  }

  const BoundaryCurve curve = geo.top_curve();
  for (double xi : points.top) {
    const MapEval m = eval_map(geo, xi, 1.0, 1);
    const NormalCurvature nc = normal_and_curvature(curve, xi);
    const double g = positive_g(problem, m.point);
    const double kh = kh_coefficient(problem, m.point, nc.normal, nc.curvature);
    const Mat2 jinv_t = m.jacobian.inverse().transpose();
    const FieldBasis fb = field_basis(space, xi, 1.0, 1);
    rhs[row] += g + kh * problem.h0 / g;
    for (int b = 0; b < fb.by.count(); ++b) {
      for (int a = 0; a < fb.bx.count(); ++a) {
        const Vec2 grad = jinv_t * Vec2(fb.bx(1, a) * fb.by(0, b), fb.bx(0, a) * fb.by(1, b));
        put(global(fb, a, b), grad.dot(nc.normal) + kh / g * fb.bx(0, a) * fb.by(0, b));
      }
    }
    ++row;
  }

  for (const Vec2& z : points.lateral) {
    const MapEval m = eval_map(geo, z.x(), z.y(), 0);
    const FieldBasis fb = field_basis(space, z.x(), z.y(), 0);
    rhs[row] += problem.h_fixed(m.point);
    for (int b = 0; b < fb.by.count(); ++b)
      for (int a = 0; a < fb.bx.count(); ++a) put(global(fb, a, b), fb.bx(0, a) * fb.by(0, b));
    ++row;
  }

  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return DiscreteSystem{std::move(A), std::move(rhs), std::move(L), BoundaryLayout{}};
}

inline Eigen::VectorXd solve_collocated(const DiscreteSystem& system, PointStrategy strategy) {
  return system.layout.expand(
      solve_sparse(system.matrix, system.rhs, std::string("collocation system (") + to_string(strategy) + ")"));
}

/// Interpolate w = (h0 - u)/g at the free-boundary abscissae; returns x-dof
/// coefficients with pinned ends (Dirichlet sides) set to zero.
inline Eigen::VectorXd collocated_boundary_update(const Eigen::VectorXd& u, const GeoMap& geo,
                                                  const ProblemData& problem, const DofLayout& layout,
                                                  const std::vector<double>& top_points) {
  const BoundaryCurve curve = geo.top_curve();
  const BoundaryLayout B = make_boundary_layout(curve.space);
  if (static_cast<int>(top_points.size()) != B.n_free())
    throw NumericalError("collocated_boundary_update: " + std::to_string(top_points.size()) + " points for " +
                         std::to_string(B.n_free()) + " unknowns");
  const Eigen::VectorXd trace = layout.top_trace(u);
  const Eigen::MatrixXd full = collocation_matrix(curve.space, top_points);
  Eigen::MatrixXd M(B.n_free(), B.n_free());
  for (int k = 0; k < B.n_free(); ++k) M.col(k) = full.col(B.free_to_dof[k]);
  Eigen::VectorXd rhs(B.n_free());
  for (int i = 0; i < B.n_free(); ++i) {
    const double t = top_points[i];
    rhs[i] = (problem.h0 - evaluate(curve.space, trace, t)) / positive_g(problem, curve.point(t));
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
  if (!lu.isInvertible()) throw NumericalError("collocated_boundary_update: singular interpolation matrix");
  return B.expand(lu.solve(rhs));
}

}  // namespace fbiga
