#pragma once

// Degree-of-freedom bookkeeping shared by the Galerkin and collocation paths.
//
// Field coefficients are indexed by (ix, jy) over degrees of freedom of the
// x- and y-spaces, global index ix + nx * jy. Dirichlet coefficients are
// lifted: their values are fixed up front by interpolating h at Greville
// points along the edge and moved to the right-hand side.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbiga/errors.hpp"
#include "fbiga/geometry.hpp"
#include "fbiga/problem.hpp"
#include "fbiga/spline_core.hpp"

namespace fbiga {

inline void check_bc_consistency(const GeoMap& geo, const ProblemData& problem) {
  const bool periodic = geo.space().x.periodic();
  if (periodic != (problem.bc_kind == BcKind::periodic_lateral))
    throw ArgumentError("lateral boundary condition does not match the periodicity of the x-space");
}

struct DofLayout {
  int nx = 0;  // x degrees of freedom
  int ny = 0;  // y degrees of freedom
  std::vector<int> free_index;      // global -> free, -1 when lifted
  std::vector<int> free_to_global;  // free -> global
  Eigen::VectorXd lifted;           // values at lifted dofs, zero elsewhere

  int n_global() const { return nx * ny; }
  int n_free() const { return static_cast<int>(free_to_global.size()); }
  int global(int ix, int jy) const { return ix + nx * jy; }
  bool is_free(int g) const { return free_index[g] >= 0; }

  Eigen::VectorXd expand(const Eigen::VectorXd& free_values) const {
    if (free_values.size() != n_free()) throw ArgumentError("DofLayout::expand: size mismatch");
    Eigen::VectorXd full = lifted;
    for (int k = 0; k < n_free(); ++k) full[free_to_global[k]] = free_values[k];
    return full;
  }

  /// x-dof coefficients of the trace on the top edge (eta = 1).
  Eigen::VectorXd top_trace(const Eigen::VectorXd& full) const {
    return full.segment(static_cast<Eigen::Index>(nx) * (ny - 1), nx);
  }
};

/// Build the field layout: the bottom row is always lifted; lateral columns
/// are lifted when `lift_lateral` is set and the lateral sides are Dirichlet.
inline DofLayout make_layout(const GeoMap& geo, const ProblemData& problem, bool lift_lateral) {
  check_bc_consistency(geo, problem);
  const auto& sx = geo.space().x;
  const auto& sy = geo.space().y;
  DofLayout L;
  L.nx = sx.dim();
  L.ny = sy.dim();
  L.free_index.assign(L.n_global(), 0);
  L.lifted = Eigen::VectorXd::Zero(L.n_global());

  auto h_at = [&](double xi, double eta) { return problem.h_fixed(geo.eval_unchecked(xi, eta, 0).point); };

  const auto gx = greville_points(sx);
  const Eigen::VectorXd bottom = interpolate([&](double xi) { return h_at(xi, 0.0); }, sx, gx);
  for (int i = 0; i < L.nx; ++i) {
    L.free_index[L.global(i, 0)] = -1;
    L.lifted[L.global(i, 0)] = bottom[i];
  }
  if (lift_lateral && problem.bc_kind == BcKind::dirichlet_lateral) {
    const auto gy = greville_points(sy);
    for (const auto& [ix, xi] : {std::pair{0, 0.0}, std::pair{L.nx - 1, 1.0}}) {
      const Eigen::VectorXd side = interpolate([&](double eta) { return h_at(xi, eta); }, sy, gy);
      for (int j = 0; j < L.ny; ++j) {
        L.free_index[L.global(ix, j)] = -1;
        L.lifted[L.global(ix, j)] = side[j];
      }
    }
  }
  for (int g = 0; g < L.n_global(); ++g) {
    if (L.free_index[g] < 0) continue;
    L.free_index[g] = static_cast<int>(L.free_to_global.size());
    L.free_to_global.push_back(g);
  }
  return L;
}

/// Unknowns of the boundary update field w = δV·n on the x-space. With
/// Dirichlet lateral sides the two end coefficients are pinned to zero.
struct BoundaryLayout {
  int n_dofs = 0;
  std::vector<int> free_index;  // x-dof -> free, -1 when pinned
  std::vector<int> free_to_dof;

  int n_free() const { return static_cast<int>(free_to_dof.size()); }

  Eigen::VectorXd expand(const Eigen::VectorXd& free_values) const {
    if (free_values.size() != n_free()) throw ArgumentError("BoundaryLayout::expand: size mismatch");
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n_dofs);
    for (int k = 0; k < n_free(); ++k) full[free_to_dof[k]] = free_values[k];
    return full;
  }
};

inline BoundaryLayout make_boundary_layout(const UnivariateSplineSpace& sx) {
  BoundaryLayout B;
  B.n_dofs = sx.dim();
  B.free_index.assign(B.n_dofs, -1);
  const int lo = sx.periodic() ? 0 : 1;
  const int hi = sx.periodic() ? B.n_dofs : B.n_dofs - 1;
  for (int i = lo; i < hi; ++i) {
    B.free_index[i] = static_cast<int>(B.free_to_dof.size());
    B.free_to_dof.push_back(i);
  }
  return B;
}

/// Quadrature point on the free boundary with everything the boundary terms need.
struct TopPoint {
  double t = 0.0;
  double weight = 0.0;  // Gauss weight times arc-length factor
  Vec2 x = Vec2::Zero();
  Vec2 normal = Vec2::UnitY();
  double curvature = 0.0;
  BasisValues basis;  // x-space functions at t, value only
};

inline std::vector<TopPoint> top_quadrature(const BoundaryCurve& curve, int quad_points = 0) {
  const int p = curve.space.degree();
  const int nq = quad_points > 0 ? quad_points : default_quad_points(p);
  const auto brk = curve.space.breakpoints();
  std::vector<TopPoint> pts;
  pts.reserve((brk.size() - 1) * nq);
  for (std::size_t e = 0; e + 1 < brk.size(); ++e) {
    const QuadratureRule q = gauss_legendre(nq, brk[e], brk[e + 1]);
    for (std::size_t k = 0; k < q.size(); ++k) {
      TopPoint tp;
      tp.t = q.points[k];
      const NormalCurvature nc = normal_and_curvature(curve, tp.t, p >= 2);
      tp.weight = q.weights[k] * curve.arc_factor(tp.t);
      tp.x = curve.point(tp.t);
      tp.normal = nc.normal;
      tp.curvature = nc.curvature;
      tp.basis = eval_basis(curve.space, tp.t, 0);
      pts.push_back(std::move(tp));
    }
  }
  return pts;
}

/// K_H = ∂_n g + H g + f on the free boundary.
inline double kh_coefficient(const ProblemData& problem, const Vec2& x, const Vec2& normal, double curvature) {
  return problem.grad_g(x).dot(normal) + curvature * problem.g(x) + problem.f(x);
}

inline double kh_coefficient(const ProblemData& problem, const BoundaryCurve& curve, double t) {
  const NormalCurvature nc = normal_and_curvature(curve, t);
  return kh_coefficient(problem, curve.point(t), nc.normal, nc.curvature);
}

/// g evaluated at x, throwing DataError unless strictly positive.
inline double positive_g(const ProblemData& problem, const Vec2& x) {
  const double g = problem.g(x);
  if (!(g > 0.0))
    throw DataError("g must be strictly positive on the free boundary; g(" + std::to_string(x.x()) + ", " +
                    std::to_string(x.y()) + ") = " + std::to_string(g));
  return g;
}

/// Check g > 0 at every boundary quadrature point.
inline void check_g_positive(const ProblemData& problem, const BoundaryCurve& curve, int quad_points = 0) {
  for (const TopPoint& tp : top_quadrature(curve, quad_points)) positive_g(problem, tp.x);
}

/// Values and parametric derivatives of the tensor-product field basis at a point.
struct FieldBasis {
  BasisValues bx;
  BasisValues by;
  int count() const { return bx.count() * by.count(); }
};

inline FieldBasis field_basis(const TensorSplineSpace& space, double xi, double eta, int deriv) {
  return {eval_basis(space.x, xi, deriv), eval_basis(space.y, eta, deriv)};
}

}  // namespace fbiga
