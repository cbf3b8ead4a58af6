#pragma once

// Galerkin discretisations of one quasi-Newton step on the current domain.
//
// Coupled form, unknowns (u, w) with w = δV·n on the free boundary Γ:
//
//   ∫_Ω ∇u·∇φ - ∫_Γ K_H w φ = ∫_Ω f φ + ∫_Γ g φ
//   ∫_Γ u v   + ∫_Γ g w v   = ∫_Γ h0 v
//
// Decoupled form, w eliminated through w = (h0 - u)/g:
//
//   ∫_Ω ∇u·∇φ + ∫_Γ (K_H/g) u φ = ∫_Ω f φ + ∫_Γ (g + K_H h0/g) φ
//
// K_H = ∂_n g + H g + f is evaluated pointwise at boundary quadrature points.

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "fbiga/discretization.hpp"
#include "fbiga/errors.hpp"
#include "fbiga/geometry.hpp"
#include "fbiga/problem.hpp"

namespace fbiga {

struct DiscreteSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  DofLayout layout;
  BoundaryLayout boundary;  // empty unless the system carries a w block

  int n_field() const { return layout.n_free(); }
  int n_boundary() const { return static_cast<int>(matrix.rows()) - n_field(); }
};

struct AssemblyOptions {
  /// Quadrature points per knot span and direction; 0 selects default_quad_points(p).
  int quad_points = 0;
};

/// Direct sparse LU solve.
inline Eigen::VectorXd solve_sparse(const Eigen::SparseMatrix<double>& A, const Eigen::VectorXd& b,
                                    const std::string& what) {
  if (A.rows() != A.cols() || A.rows() != b.size())
    throw NumericalError(what + ": system is not square (" + std::to_string(A.rows()) + "x" +
                         std::to_string(A.cols()) + ")");
  if (A.rows() == 0) return Eigen::VectorXd();
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw NumericalError(what + ": factorisation failed (" + lu.lastErrorMessage() + ")");
  Eigen::VectorXd x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite())
    throw NumericalError(what + ": solve produced non-finite values; log|det| = " +
                         std::to_string(lu.logAbsDeterminant()));
  return x;
}

namespace detail {

/// Accumulates entries of a system restricted to free dofs, moving lifted
/// columns to the right-hand side.
class SystemBuilder {
 public:
  SystemBuilder(const DofLayout& layout, int n_extra) : L_(layout), n_(layout.n_free() + n_extra) {
    rhs_ = Eigen::VectorXd::Zero(n_);
  }

  /// Row `row` (system index) times field column `g` (global field dof).
  void add_field(int row, int g, double value) {
    const int c = L_.free_index[g];
    if (c >= 0)
      trip_.emplace_back(row, c, value);
    else
      rhs_[row] -= value * L_.lifted[g];
  }
  void add(int row, int col, double value) { trip_.emplace_back(row, col, value); }
  void add_rhs(int row, double value) { rhs_[row] += value; }
  int field_row(int g) const { return L_.free_index[g]; }

  std::pair<Eigen::SparseMatrix<double>, Eigen::VectorXd> finish() {
    Eigen::SparseMatrix<double> A(n_, n_);
    A.setFromTriplets(trip_.begin(), trip_.end());
    A.makeCompressed();
    return {std::move(A), std::move(rhs_)};
  }

 private:
  const DofLayout& L_;
  int n_;
  std::vector<Eigen::Triplet<double>> trip_;
  Eigen::VectorXd rhs_;
};

/// ∫ ∇u·∇φ and ∫ f φ over the mapped domain.
inline void add_stiffness_and_load(const GeoMap& geo, const ProblemData& problem, const DofLayout& L, int nq,
                                   SystemBuilder& sys) {
  const TensorSplineSpace& space = geo.space();
  const auto bx = space.x.breakpoints(), by = space.y.breakpoints();
  const int n_loc = (space.degree() + 1) * (space.degree() + 1);
  std::vector<int> idx(n_loc);
  std::vector<double> phi(n_loc);
  std::vector<Vec2> grad(n_loc);

  for (std::size_t ey = 0; ey + 1 < by.size(); ++ey) {
    const QuadratureRule qy = gauss_legendre(nq, by[ey], by[ey + 1]);
    for (std::size_t ex = 0; ex + 1 < bx.size(); ++ex) {
      const QuadratureRule qx = gauss_legendre(nq, bx[ex], bx[ex + 1]);
      for (std::size_t ky = 0; ky < qy.size(); ++ky) {
        for (std::size_t kx = 0; kx < qx.size(); ++kx) {
          const double xi = qx.points[kx], eta = qy.points[ky];
          const MapEval m = eval_map(geo, xi, eta, 1);
          const double w = qx.weights[kx] * qy.weights[ky] * m.jacobian.determinant();
          const Mat2 jinv_t = m.jacobian.inverse().transpose();
          const FieldBasis fb = field_basis(space, xi, eta, 1);
          int k = 0;
          for (int b = 0; b < fb.by.count(); ++b) {
            for (int a = 0; a < fb.bx.count(); ++a, ++k) {
              idx[k] = L.global(space.x.dof(fb.bx.first + a), space.y.dof(fb.by.first + b));
              phi[k] = fb.bx(0, a) * fb.by(0, b);
              grad[k] = jinv_t * Vec2(fb.bx(1, a) * fb.by(0, b), fb.bx(0, a) * fb.by(1, b));
            }
          }
          const double fv = problem.f(m.point);
          for (int r = 0; r < n_loc; ++r) {
            const int row = sys.field_row(idx[r]);
            if (row < 0) continue;
            sys.add_rhs(row, w * fv * phi[r]);
            for (int c = 0; c < n_loc; ++c) sys.add_field(row, idx[c], w * grad[r].dot(grad[c]));
          }
        }
      }
    }
  }
}

inline int quad_points_for(const GeoMap& geo, const AssemblyOptions& opts) {
  return opts.quad_points > 0 ? opts.quad_points : default_quad_points(geo.space().degree());
}

}  // namespace detail

/// Block system of the coupled scheme; unknown order is [u_free, w_free].
inline DiscreteSystem assemble_coupled(const GeoMap& geo, const ProblemData& problem,
                                       const AssemblyOptions& opts = {}) {
  const int nq = detail::quad_points_for(geo, opts);
  const auto& sx = geo.space().x;
  DofLayout L = make_layout(geo, problem, true);
  BoundaryLayout B = make_boundary_layout(sx);
  const int nu = L.n_free();
  const int top = L.ny - 1;

  detail::SystemBuilder sys(L, B.n_free());
  detail::add_stiffness_and_load(geo, problem, L, nq, sys);

  for (const TopPoint& tp : top_quadrature(geo.top_curve(), nq)) {
    const double g = positive_g(problem, tp.x);
    const double kh = kh_coefficient(problem, tp.x, tp.normal, tp.curvature);
    const BasisValues& b = tp.basis;
    for (int a = 0; a < b.count(); ++a) {
      const int dof_a = sx.dof(b.first + a);
      const int row_u = sys.field_row(L.global(dof_a, top));
      const int row_w = B.free_index[dof_a];
      const double va = b(0, a);
      if (row_u >= 0) sys.add_rhs(row_u, tp.weight * g * va);
      if (row_w >= 0) sys.add_rhs(nu + row_w, tp.weight * problem.h0 * va);
      for (int c = 0; c < b.count(); ++c) {
        const int dof_c = sx.dof(b.first + c);
        const int col_w = B.free_index[dof_c];
        const double vv = tp.weight * va * b(0, c);
        if (row_u >= 0 && col_w >= 0) sys.add(row_u, nu + col_w, -kh * vv);
        if (row_w >= 0) {
          sys.add_field(nu + row_w, L.global(dof_c, top), vv);
          if (col_w >= 0) sys.add(nu + row_w, nu + col_w, g * vv);
        }
      }
    }
  }
  auto [A, rhs] = sys.finish();
  return DiscreteSystem{std::move(A), std::move(rhs), std::move(L), std::move(B)};
}

struct CoupledSolution {
  Eigen::VectorXd u;  // all field coefficients, lifted values included
  Eigen::VectorXd w;  // x-dof coefficients of δV·n, pinned entries zero
};

inline CoupledSolution solve_coupled(const DiscreteSystem& system) {
  const Eigen::VectorXd x = solve_sparse(system.matrix, system.rhs, "coupled Galerkin system");
  const int nu = system.n_field();
  return {system.layout.expand(x.head(nu)), system.boundary.expand(x.tail(system.n_boundary()))};
}

/// Single-field system of the decoupled (splitting) scheme.
inline DiscreteSystem assemble_decoupled(const GeoMap& geo, const ProblemData& problem,
                                         const AssemblyOptions& opts = {}) {
  const int nq = detail::quad_points_for(geo, opts);
  const auto& sx = geo.space().x;
  DofLayout L = make_layout(geo, problem, true);
  const int top = L.ny - 1;

  detail::SystemBuilder sys(L, 0);
  detail::add_stiffness_and_load(geo, problem, L, nq, sys);

  for (const TopPoint& tp : top_quadrature(geo.top_curve(), nq)) {
    const double g = positive_g(problem, tp.x);
    const double kh = kh_coefficient(problem, tp.x, tp.normal, tp.curvature);
    const BasisValues& b = tp.basis;
    for (int a = 0; a < b.count(); ++a) {
      const int row = sys.field_row(L.global(sx.dof(b.first + a), top));
      if (row < 0) continue;
      const double va = b(0, a);
      sys.add_rhs(row, tp.weight * (g + kh * problem.h0 / g) * va);
      for (int c = 0; c < b.count(); ++c)
        sys.add_field(row, L.global(sx.dof(b.first + c), top), tp.weight * kh / g * va * b(0, c));
    }
  }
  auto [A, rhs] = sys.finish();
  return DiscreteSystem{std::move(A), std::move(rhs), std::move(L), BoundaryLayout{}};
}

/// Solve a single-field system; returns all field coefficients.
inline Eigen::VectorXd solve_field(const DiscreteSystem& system, const std::string& what = "Galerkin system") {
  return system.layout.expand(solve_sparse(system.matrix, system.rhs, what));
}

/// L2(Γ) projection of (h0 - u)/g onto the boundary update space.
inline Eigen::VectorXd galerkin_boundary_update(const Eigen::VectorXd& u, const GeoMap& geo,
                                                const ProblemData& problem, const DofLayout& layout,
                                                const AssemblyOptions& opts = {}) {
  const BoundaryCurve curve = geo.top_curve();
  const Eigen::VectorXd trace = layout.top_trace(u);
  ProjectionOptions po;
  po.weight = [&](double t) { return curve.arc_factor(t); };
  po.pin_ends = !curve.space.periodic();
  po.quad_points = detail::quad_points_for(geo, opts);
  return l2_project(
      [&](double t) {
        const Vec2 x = curve.point(t);
        return (problem.h0 - evaluate(curve.space, trace, t)) / positive_g(problem, x);
      },
      curve.space, po);
}

/// ∫_Ω ψ over the mapped domain.
inline double domain_integral(const GeoMap& geo, const ScalarField& psi, int quad_points = 0) {
  const int nq = quad_points > 0 ? quad_points : default_quad_points(geo.space().degree());
  const auto bx = geo.space().x.breakpoints(), by = geo.space().y.breakpoints();
  double s = 0.0;
  for (std::size_t ey = 0; ey + 1 < by.size(); ++ey) {
    const QuadratureRule qy = gauss_legendre(nq, by[ey], by[ey + 1]);
    for (std::size_t ex = 0; ex + 1 < bx.size(); ++ex) {
      const QuadratureRule qx = gauss_legendre(nq, bx[ex], bx[ex + 1]);
      for (std::size_t ky = 0; ky < qy.size(); ++ky)
        for (std::size_t kx = 0; kx < qx.size(); ++kx) {
          const MapEval m = eval_map(geo, qx.points[kx], qy.points[ky], 1);
          s += qx.weights[kx] * qy.weights[ky] * m.jacobian.determinant() * psi(m.point);
        }
    }
  }
  return s;
}

/// Shape derivative of ∫_Ω ψ for the vertical boundary velocity (0, δ(t)),
/// δ given by x-dof coefficients: ∫_Γ ψ V·n dΓ.
inline double hadamard_domain_derivative(const BoundaryCurve& curve, const ScalarField& psi,
                                         const Eigen::VectorXd& delta, int quad_points = 0) {
  double s = 0.0;
  for (const TopPoint& tp : top_quadrature(curve, quad_points)) {
    double d = 0.0;
    for (int k = 0; k < tp.basis.count(); ++k) d += delta[curve.space.dof(tp.basis.first + k)] * tp.basis(0, k);
    s += tp.weight * psi(tp.x) * d * tp.normal.y();
  }
  return s;
}

}  // namespace fbiga
