#pragma once

// Spline parametrisation of the strip domain below the free boundary.
//
// The control net is indexed by raw basis indices (i, j), i along x and j
// along y, stored at i + nx * j. Row j = 0 is the fixed bottom y = 0, row
// j = ny - 1 is the free boundary. The x-coordinates are the Greville
// abscissae of the x-space, so x(xi, eta) = xi everywhere.

#include <array>
#include <cmath>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fbiga/errors.hpp"
#include "fbiga/spline_core.hpp"

namespace fbiga {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Greville abscissae of every raw basis function (no periodic wrapping).
inline std::vector<double> raw_greville(const UnivariateSplineSpace& space) {
  const auto& U = space.knot_vector().knots();
  const int p = space.degree();
  std::vector<double> g(space.n_funcs());
  for (int i = 0; i < space.n_funcs(); ++i) {
    double s = 0.0;
    for (int k = 1; k <= p; ++k) s += U[i + k];
    g[i] = s / p;
  }
  if (!space.periodic()) {
    g.front() = 0.0;
    g.back() = 1.0;
  }
  return g;
}

/// Free boundary as the graph t -> (t, y(t)); y stored with raw coefficients.
struct BoundaryCurve {
  UnivariateSplineSpace space;
  Eigen::VectorXd y_coeffs;
  double strip_width = 1.0;

  double y(double t, int deriv = 0) const { return evaluate_raw(space, y_coeffs, t, deriv); }
  Vec2 point(double t) const { return {strip_width * t, y(t)}; }
  /// ds/dt of the graph.
  double arc_factor(double t) const {
    const double yp = y(t, 1);
    return std::sqrt(1.0 + yp * yp);
  }
};

struct NormalCurvature {
  Vec2 normal;
  double curvature = 0.0;
};

/// Upward unit normal and signed curvature H = -y''/(1+y'^2)^{3/2}.
inline NormalCurvature normal_and_curvature(const BoundaryCurve& curve, double t, bool with_curvature = true) {
  if (with_curvature && curve.space.degree() < 2)
    throw ArgumentError("normal_and_curvature: curvature needs degree >= 2");
  const BasisValues b = eval_basis(curve.space, t, with_curvature ? 2 : 1);
  double y1 = 0.0, y2 = 0.0;
  for (int k = 0; k < b.count(); ++k) {
    y1 += curve.y_coeffs[b.first + k] * b(1, k);
    if (with_curvature) y2 += curve.y_coeffs[b.first + k] * b(2, k);
  }
  const double r2 = 1.0 + y1 * y1;
  const double r = std::sqrt(r2);
  NormalCurvature out;
  out.normal = Vec2(-y1 / r, 1.0 / r);
  out.curvature = with_curvature ? -y2 / (r2 * r) : 0.0;
  return out;
}

struct MapEval {
  Vec2 point = Vec2::Zero();
  Mat2 jacobian = Mat2::Zero();           // jacobian(c, a) = dF_c / dxi_a
  std::array<Mat2, 2> hessian{Mat2::Zero(), Mat2::Zero()};  // hessian[c](a, b)
};

class GeoMap {
 public:
  GeoMap(TensorSplineSpace space, std::vector<Vec2> control_points)
      : space_(std::move(space)), cp_(std::move(control_points)) {
    if (static_cast<int>(cp_.size()) != nx() * ny())
      throw ArgumentError("GeoMap: control grid has wrong size");
    for (int i = 0; i < nx(); ++i)
      if (cp(i, 0).y() != 0.0) throw GeometryError("GeoMap: bottom control row must lie on y = 0");
  }

  /// Strip [0,1] x [0, y(x)] with top coefficients given per raw x-function.
  static GeoMap strip(const TensorSplineSpace& space, const Eigen::VectorXd& top_raw) {
    const auto gx = raw_greville(space.x);
    const auto gy = raw_greville(space.y);
    const int nx = space.x.n_funcs(), ny = space.y.n_funcs();
    if (top_raw.size() != nx) throw ArgumentError("GeoMap::strip: top row size mismatch");
    std::vector<Vec2> cp(nx * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) cp[i + nx * j] = Vec2(gx[i], gy[j] * top_raw[i]);
    return GeoMap(space, std::move(cp));
  }

  /// Strip whose top boundary is the L2 projection of `boundary` onto the x-space.
  static GeoMap strip(const TensorSplineSpace& space, const std::function<double(double)>& boundary) {
    return strip(space, expand_to_raw(space.x, l2_project(boundary, space.x)));
  }

  const TensorSplineSpace& space() const { return space_; }
  int nx() const { return space_.x.n_funcs(); }
  int ny() const { return space_.y.n_funcs(); }
  const Vec2& cp(int i, int j) const { return cp_[i + nx() * j]; }
  const std::vector<Vec2>& control_points() const { return cp_; }

  BoundaryCurve top_curve() const {
    Eigen::VectorXd y(nx());
    for (int i = 0; i < nx(); ++i) y[i] = cp(i, ny() - 1).y();
    return BoundaryCurve{space_.x, y, 1.0};
  }

  /// Point, Jacobian and (order 2) second derivatives without degeneracy checks.
  MapEval eval_unchecked(double xi, double eta, int order) const {
    const BasisValues bx = eval_basis(space_.x, xi, std::min(order, space_.x.degree()));
    const BasisValues by = eval_basis(space_.y, eta, std::min(order, space_.y.degree()));
    MapEval m;
    for (int b = 0; b < by.count(); ++b) {
      for (int a = 0; a < bx.count(); ++a) {
        const Vec2& P = cp(bx.first + a, by.first + b);
        m.point += bx(0, a) * by(0, b) * P;
        if (order >= 1) {
          m.jacobian.col(0) += bx(1, a) * by(0, b) * P;
          m.jacobian.col(1) += bx(0, a) * by(1, b) * P;
        }
        if (order >= 2) {
          const double dxx = bx(2, a) * by(0, b), dxy = bx(1, a) * by(1, b), dyy = bx(0, a) * by(2, b);
          for (int c = 0; c < 2; ++c) {
            m.hessian[c](0, 0) += dxx * P[c];
            m.hessian[c](0, 1) += dxy * P[c];
            m.hessian[c](1, 1) += dyy * P[c];
          }
        }
      }
    }
    for (int c = 0; c < 2; ++c) m.hessian[c](1, 0) = m.hessian[c](0, 1);
    return m;
  }

 private:
  TensorSplineSpace space_;
  std::vector<Vec2> cp_;
};

/// Evaluate the map at (xi, eta); throws GeometryError on a degenerate Jacobian.
inline MapEval eval_map(const GeoMap& geo, double xi, double eta, int order = 1) {
  if (order < 0 || order > 2) throw ArgumentError("eval_map: order must be 0, 1 or 2");
  MapEval m = geo.eval_unchecked(xi, eta, order);
  if (order >= 1 && m.jacobian.determinant() <= 1e-14)
    throw GeometryError("eval_map: degenerate Jacobian at (" + std::to_string(xi) + ", " + std::to_string(eta) + ")");
  return m;
}

/// Sampled injectivity check: det J > 0 at every quadrature point of every element.
inline void check_injective(const GeoMap& geo, int quad_points = 0) {
  const int nq = quad_points > 0 ? quad_points : geo.space().degree() + 1;
  const auto bx = geo.space().x.breakpoints(), by = geo.space().y.breakpoints();
  for (std::size_t ey = 0; ey + 1 < by.size(); ++ey) {
    const QuadratureRule qy = gauss_legendre(nq, by[ey], by[ey + 1]);
    for (std::size_t ex = 0; ex + 1 < bx.size(); ++ex) {
      const QuadratureRule qx = gauss_legendre(nq, bx[ex], bx[ex + 1]);
      for (double eta : qy.points)
        for (double xi : qx.points)
          if (geo.eval_unchecked(xi, eta, 1).jacobian.determinant() <= 1e-14)
            throw GeometryError("GeoMap: nonpositive Jacobian near (" + std::to_string(xi) + ", " +
                                std::to_string(eta) + "); boundary moved too far");
    }
  }
}

/// Replace the top control row by `new_curve` and refill the interior with
/// the discrete Coons blend over Greville parameters. Lateral columns follow
/// their top corner linearly in v_j; bottom row is untouched.
inline GeoMap coons_refit(const GeoMap& geo, const BoundaryCurve& new_curve) {
  const int nx = geo.nx(), ny = geo.ny();
  const int N = nx - 1, M = ny - 1;
  if (new_curve.y_coeffs.size() != nx || new_curve.space.n_funcs() != nx)
    throw ArgumentError("coons_refit: curve is not built on the map's x-space");

  const auto gx = raw_greville(geo.space().x);
  const auto gy = raw_greville(geo.space().y);
  std::vector<double> u(nx), v(ny);
  for (int i = 0; i < nx; ++i) u[i] = (gx[i] - gx[0]) / (gx[N] - gx[0]);
  for (int j = 0; j < ny; ++j) v[j] = (gy[j] - gy[0]) / (gy[M] - gy[0]);

  std::vector<Vec2> P = geo.control_points();
  auto at = [&](int i, int j) -> Vec2& { return P[i + nx * j]; };

  for (int i : {0, N}) {
    const double shift = new_curve.y_coeffs[i] - geo.cp(i, M).y();
    for (int j = 1; j < M; ++j) at(i, j).y() += v[j] * shift;
  }
  for (int i = 0; i < nx; ++i) at(i, M).y() = new_curve.y_coeffs[i];

  for (int j = 1; j < M; ++j) {
    for (int i = 1; i < N; ++i) {
      at(i, j) = (1 - u[i]) * at(0, j) + u[i] * at(N, j) + (1 - v[j]) * at(i, 0) + v[j] * at(i, M) -
                 ((1 - u[i]) * (1 - v[j]) * at(0, 0) + u[i] * (1 - v[j]) * at(N, 0) +
                  (1 - u[i]) * v[j] * at(0, M) + u[i] * v[j] * at(N, M));
    }
  }
  GeoMap out(geo.space(), std::move(P));
  check_injective(out);
  return out;
}

// ---------------------------------------------------------------------------
// Plain-text geometry snapshots.
//
//   fbiga-geometry 1
//   degree <px> <py>
//   kind <open|periodic> <open|periodic>
//   knots <nkx> <nky>
//   <nkx knots>
//   <nky knots>
//   controls <nx> <ny>
//   x y            (nx*ny lines, row-major: j outer, i inner)

inline void write_geometry(std::ostream& os, const GeoMap& geo) {
  const auto& sx = geo.space().x;
  const auto& sy = geo.space().y;
  auto kind = [](const UnivariateSplineSpace& s) { return s.periodic() ? "periodic" : "open"; };
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << std::setprecision(17);
  buf << "fbiga-geometry 1\n";
  buf << "degree " << sx.degree() << ' ' << sy.degree() << '\n';
  buf << "kind " << kind(sx) << ' ' << kind(sy) << '\n';
  buf << "knots " << sx.knot_vector().size() << ' ' << sy.knot_vector().size() << '\n';
  for (const auto* s : {&sx, &sy}) {
    const auto& k = s->knot_vector().knots();
    for (std::size_t i = 0; i < k.size(); ++i) buf << (i ? " " : "") << k[i];
    buf << '\n';
  }
  buf << "controls " << geo.nx() << ' ' << geo.ny() << '\n';
  for (const Vec2& P : geo.control_points()) buf << P.x() << ' ' << P.y() << '\n';
  os << buf.str();
}

inline GeoMap read_geometry(std::istream& is) {
  std::istringstream in(std::string(std::istreambuf_iterator<char>(is), {}));
  in.imbue(std::locale::classic());
  auto expect = [&](const char* word) {
    std::string w;
    if (!(in >> w) || w != word) throw ArgumentError(std::string("read_geometry: expected '") + word + "'");
  };
  int version = 0, px = 0, py = 0;
  std::size_t nkx = 0, nky = 0;
  std::string kx, ky;
  expect("fbiga-geometry");
  in >> version;
  expect("degree");
  in >> px >> py;
  expect("kind");
  in >> kx >> ky;
  expect("knots");
  in >> nkx >> nky;
  if (!in || version != 1) throw ArgumentError("read_geometry: malformed header");
  std::vector<double> ux(nkx), uy(nky);
  for (double& k : ux) in >> k;
  for (double& k : uy) in >> k;
  auto make = [](std::vector<double> k, int p, const std::string& kind) {
    const bool periodic = kind == "periodic";
    return UnivariateSplineSpace(KnotVector(std::move(k), p, periodic ? KnotKind::uniform_periodic : KnotKind::open),
                                 periodic);
  };
  TensorSplineSpace space(make(std::move(ux), px, kx), make(std::move(uy), py, ky));
  expect("controls");
  int nx = 0, ny = 0;
  in >> nx >> ny;
  std::vector<Vec2> cp(static_cast<std::size_t>(nx) * ny);
  for (Vec2& P : cp) in >> P.x() >> P.y();
  if (!in) throw ArgumentError("read_geometry: truncated control grid");
  return GeoMap(std::move(space), std::move(cp));
}

}  // namespace fbiga
