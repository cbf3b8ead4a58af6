#pragma once

// Quasi-Newton outer loops for the free boundary problem.
//
// Each iteration solves for u on the current domain, obtains the boundary
// update w = δV·n (as an unknown of the coupled system, or from
// w = (h0 - u)/g otherwise), moves the free boundary vertically by w/n_y and
// refits the interior of the control net.

#include <charconv>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbiga/assembly_galerkin.hpp"
#include "fbiga/collocation.hpp"
#include "fbiga/discretization.hpp"
#include "fbiga/errors.hpp"
#include "fbiga/geometry.hpp"
#include "fbiga/problem.hpp"
#include "fbiga/spline_core.hpp"

namespace fbiga {

enum class Algorithm { coupled, decoupled, collocation };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::coupled: return "coupled";
    case Algorithm::decoupled: return "decoupled";
    case Algorithm::collocation: return "collocation";
  }
  return "?";
}

enum class Status { converged, plateau, max_iter, failed };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::converged: return "converged";
    case Status::plateau: return "plateau";
    case Status::max_iter: return "max-iter";
    case Status::failed: return "failed";
  }
  return "?";
}

struct SolverConfig {
  Algorithm algorithm = Algorithm::decoupled;
  int degree = 3;
  int nx = 8;
  int ny = 8;
  /// Stopping threshold on the arc-length L2 norm of w = δV·n.
  double tol = 1e-10;
  int max_iter = 50;
  PointStrategy point_strategy = PointStrategy::greville;
  /// Initial free boundary y0(x); flat y = 1 when empty.
  std::function<double(double)> initial_boundary;
  /// Quadrature points per span and direction; 0 selects default_quad_points.
  int quad_points = 0;

  void validate() const {
    if (!(tol > 0.0)) throw ArgumentError("SolverConfig: tol must be positive");
    if (max_iter < 1) throw ArgumentError("SolverConfig: max_iter must be >= 1");
    if (degree < 2) throw ArgumentError("SolverConfig: degree must be >= 2");
    if (nx < 1 || ny < 1) throw ArgumentError("SolverConfig: mesh must have at least one element per direction");
  }
};

struct IterationRecord {
  int iter = 0;
  double dirichlet_error = 0.0;
  /// NaN when the exact boundary is unknown.
  double surface_error = std::numeric_limits<double>::quiet_NaN();
  double update_norm = 0.0;
  /// Seconds since the start of the run.
  double wall_time = 0.0;
};

struct ConvergenceHistory {
  SolverConfig config;
  std::vector<IterationRecord> records;
  Status status = Status::failed;
  std::string message;
  std::optional<GeoMap> final_geometry;
};

/// Arc-length L2 norm over Γ of the boundary field with x-dof coefficients.
inline double boundary_l2_norm(const BoundaryCurve& curve, const Eigen::VectorXd& coeffs, int quad_points = 0) {
  double s = 0.0;
  for (const TopPoint& tp : top_quadrature(curve, quad_points)) {
    double v = 0.0;
    for (int k = 0; k < tp.basis.count(); ++k) v += coeffs[curve.space.dof(tp.basis.first + k)] * tp.basis(0, k);
    s += tp.weight * v * v;
  }
  return std::sqrt(s);
}

/// ‖u(Γ) - h0‖ in L2(Γ) with arc-length measure.
inline double dirichlet_error(const Eigen::VectorXd& u, const GeoMap& geo, double h0, int quad_points = 0) {
  const BoundaryCurve curve = geo.top_curve();
  const int nx = geo.space().x.dim();
  const Eigen::VectorXd trace = u.segment(u.size() - nx, nx);
  double s = 0.0;
  for (const TopPoint& tp : top_quadrature(curve, quad_points)) {
    double v = -h0;
    for (int k = 0; k < tp.basis.count(); ++k) v += trace[curve.space.dof(tp.basis.first + k)] * tp.basis(0, k);
    s += tp.weight * v * v;
  }
  return std::sqrt(s);
}

/// Vertical L2 distance over t in [0,1] between y(t) and 1 + alpha(t).
inline double surface_error(const BoundaryCurve& curve, const std::function<double(double)>& alpha,
                            int quad_points = 0) {
  const int nq = quad_points > 0 ? quad_points : default_quad_points(curve.space.degree());
  const auto brk = curve.space.breakpoints();
  double s = 0.0;
  for (std::size_t e = 0; e + 1 < brk.size(); ++e) {
    const QuadratureRule q = gauss_legendre(nq, brk[e], brk[e + 1]);
    for (std::size_t k = 0; k < q.size(); ++k) {
      const double d = curve.y(q.points[k]) - 1.0 - alpha(q.points[k]);
      s += q.weights[k] * d * d;
    }
  }
  return std::sqrt(s);
}

/// Vertical update: project d = w / n_y onto the y-coefficient space and add
/// it to the curve. Ends stay pinned for open (Dirichlet-lateral) curves.
inline BoundaryCurve update_boundary(const BoundaryCurve& curve, const Eigen::VectorXd& w, int quad_points = 0) {
  const auto& space = curve.space;
  if (w.size() != space.dim()) throw ArgumentError("update_boundary: w has wrong size");
  ProjectionOptions po;
  po.pin_ends = !space.periodic();
  po.quad_points = quad_points;
  const Eigen::VectorXd d = l2_project(
      [&](double t) {
        const double ny = normal_and_curvature(curve, t, false).normal.y();
        if (!(ny > 0.0)) throw GeometryError("update_boundary: boundary normal is not upward at t = " + std::to_string(t));
        return evaluate(space, w, t) / ny;
      },
      space, po);
  BoundaryCurve out = curve;
  out.y_coeffs += expand_to_raw(space, d);
  return out;
}

/// Spaces used by a run: open or periodic in x, open in y.
inline TensorSplineSpace make_spaces(const SolverConfig& config, BcKind bc) {
  UnivariateSplineSpace sx = bc == BcKind::periodic_lateral ? build_periodic_space_elements(config.nx, config.degree)
                                                             : build_open_space(config.nx, config.degree);
  return TensorSplineSpace(std::move(sx), build_open_space(config.ny, config.degree));
}

inline GeoMap initial_geometry(const SolverConfig& config, BcKind bc) {
  const TensorSplineSpace space = make_spaces(config, bc);
  if (config.initial_boundary) return GeoMap::strip(space, config.initial_boundary);
  return GeoMap::strip(space, Eigen::VectorXd::Ones(space.x.n_funcs()));
}

/// Outcome of one quasi-Newton step on a fixed geometry.
struct StepResult {
  Eigen::VectorXd u;  // field coefficients
  Eigen::VectorXd w;  // boundary update, x-dof coefficients
};

inline StepResult quasi_newton_step(const GeoMap& geo, const ProblemData& problem, const SolverConfig& config) {
  const AssemblyOptions opts{config.quad_points};
  switch (config.algorithm) {
    case Algorithm::coupled: {
      const CoupledSolution s = solve_coupled(assemble_coupled(geo, problem, opts));
      return {s.u, s.w};
    }
    case Algorithm::decoupled: {
      const DiscreteSystem sys = assemble_decoupled(geo, problem, opts);
      Eigen::VectorXd u = solve_field(sys, "decoupled Galerkin system");
      Eigen::VectorXd w = galerkin_boundary_update(u, geo, problem, sys.layout, opts);
      return {std::move(u), std::move(w)};
    }
    case Algorithm::collocation: {
      const auto& sp = geo.space();
      const CollocationPointSet pts = collocation_points(config.point_strategy, sp.x, sp.y, problem.bc_kind);
      const DiscreteSystem sys = assemble_collocated(geo, problem, pts);
      Eigen::VectorXd u = solve_collocated(sys, config.point_strategy);
      Eigen::VectorXd w = collocated_boundary_update(u, geo, problem, sys.layout, pts.top);
      return {std::move(u), std::move(w)};
    }
  }
  throw ArgumentError("quasi_newton_step: unknown algorithm");
}

/// Update norm stagnates: relative change below 1% over each of the last three steps.
inline bool is_plateau(const std::vector<IterationRecord>& r) {
  if (r.size() < 4) return false;
  for (std::size_t k = r.size() - 3; k < r.size(); ++k) {
    const double prev = r[k - 1].update_norm;
    if (!(std::abs(r[k].update_norm - prev) < 0.01 * prev)) return false;
  }
  return true;
}

inline ConvergenceHistory run(const SolverConfig& config, const ProblemData& problem) {
  ConvergenceHistory hist;
  hist.config = config;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };

  std::optional<GeoMap> geo;
  try {
    config.validate();
    geo = initial_geometry(config, problem.bc_kind);
    check_bc_consistency(*geo, problem);
    if (geo->top_curve().y_coeffs.minCoeff() <= 0.0)
      throw GeometryError("initial boundary must lie strictly above y = 0");
    check_injective(*geo);
  } catch (const std::exception& e) {
    hist.status = Status::failed;
    hist.message = std::string("setup: ") + e.what();
    return hist;
  }

  hist.status = Status::max_iter;
  for (int k = 1; k <= config.max_iter; ++k) {
    try {
      const BoundaryCurve curve = geo->top_curve();
      check_g_positive(problem, curve, config.quad_points);
      const StepResult step = quasi_newton_step(*geo, problem, config);

      IterationRecord rec;
      rec.iter = k;
      rec.dirichlet_error = dirichlet_error(step.u, *geo, problem.h0, config.quad_points);
      if (problem.exact_alpha) rec.surface_error = surface_error(curve, problem.exact_alpha, config.quad_points);
      rec.update_norm = boundary_l2_norm(curve, step.w, config.quad_points);

      geo = coons_refit(*geo, update_boundary(curve, step.w, config.quad_points));
      rec.wall_time = elapsed();
      hist.records.push_back(rec);

      if (rec.update_norm <= config.tol) {
        hist.status = Status::converged;
        break;
      }
      if (is_plateau(hist.records)) {
        hist.status = Status::plateau;
        break;
      }
    } catch (const std::exception& e) {
      hist.status = Status::failed;
      hist.message = "iteration " + std::to_string(k) + ": " + e.what();
      break;
    }
  }
  hist.final_geometry = std::move(geo);
  return hist;
}

// ---------------------------------------------------------------------------
// CSV output

inline std::string format_sci(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::scientific, 15);
  return std::string(buf, res.ptr);
}

inline void write_history_csv(std::ostream& os, const ConvergenceHistory& hist) {
  os << "iter,dirichlet_error,surface_error,update_norm,wall_time_s\n";
  for (const IterationRecord& r : hist.records) {
    os << r.iter << ',' << format_sci(r.dirichlet_error) << ',' << format_sci(r.surface_error) << ','
       << format_sci(r.update_norm) << ',' << format_sci(r.wall_time) << '\n';
  }
}

}  // namespace fbiga
