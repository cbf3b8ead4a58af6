#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "fbiga/geometry.hpp"
#include "oracles.hpp"

using namespace fbiga;

namespace {

double parabola(double x) { return 1.0 + 0.25 * x * (1.0 - x); }

TensorSplineSpace open_space(int n, int p) { return TensorSplineSpace(build_open_space(n, p), build_open_space(n, p)); }

BoundaryCurve curve_of(const UnivariateSplineSpace& s, const std::function<double(double)>& f) {
  return BoundaryCurve{s, expand_to_raw(s, l2_project(f, s)), 1.0};
}

}  // namespace

TEST(EvalMap, IdentityStrip) {
  const GeoMap geo = GeoMap::strip(open_space(3, 2), [](double) { return 1.0; });
  const MapEval m = eval_map(geo, 0.3, 0.4, 2);
  EXPECT_NEAR(m.point.x(), 0.3, 1e-15);
  EXPECT_NEAR(m.point.y(), 0.4, 1e-15);
  EXPECT_LE((m.jacobian - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-14);
  for (const Mat2& h : m.hessian) EXPECT_LE(h.cwiseAbs().maxCoeff(), 1e-13);
}

TEST(EvalMap, XComponentIsIdentity) {
  const GeoMap geo = GeoMap::strip(open_space(4, 3), [](double x) { return 1.0 + 0.1 * std::sin(6 * x); });
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int n = 0; n < 200; ++n) {
    const double xi = uni(rng), eta = uni(rng);
    EXPECT_NEAR(eval_map(geo, xi, eta, 0).point.x(), xi, 1e-14);
  }
  const GeoMap per = GeoMap::strip(TensorSplineSpace(build_periodic_space_elements(5, 3), build_open_space(3, 3)),
                                   [](double x) { return 1.0 + 0.1 * std::sin(6.283185307179586 * x); });
  for (int n = 0; n < 200; ++n) {
    const double xi = uni(rng), eta = uni(rng);
    EXPECT_NEAR(eval_map(per, xi, eta, 0).point.x(), xi, 1e-14);
  }
}

TEST(EvalMap, ParabolicTopPoint) {
  const TensorSplineSpace sp = open_space(1, 2);
  const GeoMap geo = GeoMap::strip(sp, parabola);
  const MapEval m = eval_map(geo, 0.5, 1.0, 0);
  EXPECT_NEAR(m.point.x(), 0.5, 1e-15);
  EXPECT_NEAR(m.point.y(), 1.0625, 1e-14);
}

TEST(EvalMap, HessianMatchesFiniteDifferences) {
  const TensorSplineSpace sp = open_space(3, 3);
  const GeoMap flat = GeoMap::strip(sp, [](double) { return 1.0; });
  const BoundaryCurve c = curve_of(sp.x, [](double x) { return 1.0 + 0.2 * std::sin(5 * x) * x; });
  const GeoMap geo = coons_refit(flat, c);
  const double h = 1e-6;
  for (auto [xi, eta] : {std::pair{0.21, 0.37}, std::pair{0.55, 0.81}, std::pair{0.9, 0.12}}) {
    const MapEval m = eval_map(geo, xi, eta, 2);
    for (int a = 0; a < 2; ++a) {
      const double dxi = a == 0 ? h : 0.0, deta = a == 1 ? h : 0.0;
      const Mat2 jp = eval_map(geo, xi + dxi, eta + deta, 1).jacobian;
      const Mat2 jm = eval_map(geo, xi - dxi, eta - deta, 1).jacobian;
      for (int c2 = 0; c2 < 2; ++c2)
        for (int b = 0; b < 2; ++b) {
          const double fd = (jp(c2, b) - jm(c2, b)) / (2 * h);
          const double ex = m.hessian[c2](b, a);
          EXPECT_NEAR(fd, ex, 1e-5 * std::max(1.0, std::abs(ex)));
        }
    }
  }
}

TEST(EvalMap, DegenerateJacobian) {
  const TensorSplineSpace sp = open_space(1, 2);
  std::vector<Vec2> cp;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) cp.emplace_back(0.5 * i, 0.0 * j);
  const GeoMap geo(sp, cp);
  EXPECT_THROW(eval_map(geo, 0.5, 0.5, 1), GeometryError);
  EXPECT_THROW(check_injective(geo), GeometryError);
}

TEST(GeoMapInvariants, BottomRowMustBeFlat) {
  const TensorSplineSpace sp = open_space(1, 1);
  std::vector<Vec2> cp{{0, 0.1}, {1, 0}, {0, 1}, {1, 1}};
  EXPECT_THROW(GeoMap(sp, cp), GeometryError);
}

TEST(NormalCurvature, FlatCurve) {
  const BoundaryCurve c = curve_of(build_open_space(3, 2), [](double) { return 1.0; });
  for (double t : {0.0, 0.3, 1.0}) {
    const NormalCurvature nc = normal_and_curvature(c, t);
    EXPECT_NEAR(nc.normal.x(), 0.0, 1e-14);
    EXPECT_NEAR(nc.normal.y(), 1.0, 1e-14);
    EXPECT_NEAR(nc.curvature, 0.0, 1e-13);
  }
}

TEST(NormalCurvature, ParabolaExamples) {
  const BoundaryCurve c = curve_of(build_open_space(1, 2), parabola);
  const NormalCurvature mid = normal_and_curvature(c, 0.5);
  EXPECT_NEAR(mid.normal.x(), 0.0, 1e-14);
  EXPECT_NEAR(mid.normal.y(), 1.0, 1e-14);
  EXPECT_NEAR(mid.curvature, 0.5, 1e-12);
  const NormalCurvature left = normal_and_curvature(c, 0.0);
  const double r = std::sqrt(1.0625);
  EXPECT_NEAR(left.normal.x(), -0.25 / r, 1e-14);
  EXPECT_NEAR(left.normal.y(), 1.0 / r, 1e-14);
}

TEST(NormalCurvature, MatchesAnalyticCurvatureOnRefinedMeshes) {
  for (int ne : {1, 4, 9}) {
    const BoundaryCurve c = curve_of(build_open_space(ne, 2), parabola);
    for (int k = 0; k <= 50; ++k) {
      const double x = k / 50.0;
      const double s = (1 - 2 * x) / 4;
      const double H = 0.5 / std::pow(1 + s * s, 1.5);
      EXPECT_NEAR(normal_and_curvature(c, x).curvature, H, 1e-12);
    }
  }
}

TEST(NormalCurvature, UnitNormal) {
  const BoundaryCurve c = curve_of(build_open_space(6, 3), [](double x) { return 1.0 + 0.3 * std::sin(7 * x); });
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int n = 0; n < 1000; ++n) EXPECT_NEAR(normal_and_curvature(c, uni(rng)).normal.norm(), 1.0, 1e-14);
}

TEST(NormalCurvature, LinearCurveHasNoCurvature) {
  const BoundaryCurve c = curve_of(build_open_space(3, 1), [](double x) { return 1.0 + x; });
  EXPECT_THROW(normal_and_curvature(c, 0.5), ArgumentError);
  EXPECT_NO_THROW(normal_and_curvature(c, 0.5, false));
}

TEST(BoundaryCurve, ArcLengthOfParabola) {
  const BoundaryCurve c = curve_of(build_open_space(1, 2), parabola);
  // ∫ sqrt(1 + s^2) dx with s = (1-2x)/4, in closed form
  auto F = [](double s) { return 0.5 * (s * std::sqrt(1 + s * s) + std::asinh(s)); };
  const double exact = 2.0 * (F(0.25) - F(-0.25));
  const QuadratureRule q = gauss_legendre(20, 0.0, 1.0);
  double len = 0.0;
  for (std::size_t k = 0; k < q.size(); ++k) len += q.weights[k] * c.arc_factor(q.points[k]);
  EXPECT_NEAR(len, exact, 1e-12);
}

TEST(Coons, ReproducesOwnBoundaryAndIsIdempotent) {
  const TensorSplineSpace sp = open_space(4, 3);
  const GeoMap flat = GeoMap::strip(sp, [](double) { return 1.0; });
  const GeoMap same = coons_refit(flat, flat.top_curve());
  for (std::size_t k = 0; k < flat.control_points().size(); ++k)
    EXPECT_LE((same.control_points()[k] - flat.control_points()[k]).norm(), 1e-15);

  const BoundaryCurve c = curve_of(sp.x, [](double x) { return 1.0 + 0.1 * x * (1 - x) * std::cos(3 * x); });
  const GeoMap once = coons_refit(flat, c);
  const GeoMap twice = coons_refit(once, c);
  for (std::size_t k = 0; k < once.control_points().size(); ++k)
    EXPECT_LE((once.control_points()[k] - twice.control_points()[k]).norm(), 1e-14);
}

TEST(Coons, RaisedFlatTopScalesRowsLinearly) {
  const TensorSplineSpace sp = open_space(3, 2);
  const GeoMap flat = GeoMap::strip(sp, [](double) { return 1.0; });
  BoundaryCurve two = flat.top_curve();
  two.y_coeffs.setConstant(2.0);
  const GeoMap raised = coons_refit(flat, two);
  const auto gy = raw_greville(sp.y);
  for (int j = 0; j < raised.ny(); ++j)
    for (int i = 0; i < raised.nx(); ++i) {
      EXPECT_NEAR(raised.cp(i, j).y(), 2.0 * gy[j], 1e-14);
      EXPECT_NEAR(raised.cp(i, j).x(), flat.cp(i, j).x(), 1e-15);
    }
}

TEST(Coons, SingleControlPointPerturbation) {
  const TensorSplineSpace sp = open_space(4, 2);
  const GeoMap flat = GeoMap::strip(sp, [](double) { return 1.0; });
  const int target = 2;
  const double delta = 0.07;
  BoundaryCurve c = flat.top_curve();
  c.y_coeffs[target] += delta;
  const GeoMap moved = coons_refit(flat, c);
  const auto gy = raw_greville(sp.y);
  for (int j = 0; j < flat.ny(); ++j)
    for (int i = 0; i < flat.nx(); ++i) {
      const double expect = i == target ? gy[j] * delta : 0.0;
      EXPECT_NEAR(moved.cp(i, j).y() - flat.cp(i, j).y(), expect, 1e-15);
    }
}

TEST(Coons, FoldOverIsReported) {
  const TensorSplineSpace sp = open_space(2, 2);
  const GeoMap flat = GeoMap::strip(sp, [](double) { return 1.0; });
  BoundaryCurve c = flat.top_curve();
  c.y_coeffs[1] = -3.0;
  EXPECT_THROW(coons_refit(flat, c), GeometryError);
}

TEST(GeometryDump, RoundTrip) {
  for (bool periodic : {false, true}) {
    const TensorSplineSpace sp(periodic ? build_periodic_space_elements(4, 3) : build_open_space(4, 3),
                               build_open_space(3, 3));
    const GeoMap geo = GeoMap::strip(sp, [](double x) { return 1.0 + 0.1 / 3.0 * std::sin(6.283185307179586 * x); });
    std::stringstream ss;
    write_geometry(ss, geo);
    const std::string text = ss.str();
    EXPECT_EQ(text.rfind("fbiga-geometry 1\n", 0), 0u);
    const GeoMap back = read_geometry(ss);
    ASSERT_EQ(back.control_points().size(), geo.control_points().size());
    EXPECT_EQ(back.space().x.periodic(), periodic);
    for (std::size_t k = 0; k < geo.control_points().size(); ++k)
      EXPECT_EQ(back.control_points()[k], geo.control_points()[k]);
    EXPECT_EQ(back.space().x.knot_vector().knots(), geo.space().x.knot_vector().knots());
  }
  std::istringstream bad("not-a-geometry");
  EXPECT_THROW(read_geometry(bad), ArgumentError);
}
