#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "fbiga/benchmarks.hpp"
#include "fbiga/fbp_solver.hpp"

using namespace fbiga;

namespace {

double parabola(double x) { return 1.0 + 0.25 * x * (1.0 - x); }

BoundaryCurve curve_on(int n, int p, const std::function<double(double)>& f) {
  const auto s = build_open_space(n, p);
  return BoundaryCurve{s, expand_to_raw(s, l2_project(f, s)), 1.0};
}

SolverConfig config(Algorithm a, int p, int n) {
  SolverConfig c;
  c.algorithm = a;
  c.degree = p;
  c.nx = c.ny = n;
  return c;
}

}  // namespace

TEST(SurfaceError, AnalyticValues) {
  const BoundaryCurve flat = curve_on(1, 2, [](double) { return 1.0; });
  EXPECT_NEAR(surface_error(flat, test1_problem().exact.alpha_ex), std::sqrt(1.0 / 480.0), 1e-12);
  EXPECT_NEAR(surface_error(curve_on(1, 2, parabola), test1_problem().exact.alpha_ex), 0.0, 1e-14);
  const BoundaryCurve fine = curve_on(16, 3, [](double) { return 1.0; });
  EXPECT_NEAR(surface_error(fine, test2_problem().exact.alpha_ex), 1.0 / (16.0 * std::sqrt(2.0)), 1e-8);
}

TEST(DirichletError, ConstantOffset) {
  const TensorSplineSpace sp(build_open_space(3, 2), build_open_space(3, 2));
  const GeoMap geo = GeoMap::strip(sp, [](double) { return 1.0; });
  const Eigen::VectorXd u = Eigen::VectorXd::Constant(sp.dim(), 1.25);
  EXPECT_NEAR(dirichlet_error(u, geo, 1.25), 0.0, 1e-15);
  EXPECT_NEAR(dirichlet_error(u, geo, 1.0), 0.25, 1e-14);
}

TEST(UpdateBoundary, FlatCurveAddsCoefficients) {
  const BoundaryCurve flat = curve_on(4, 2, [](double) { return 1.0; });
  Eigen::VectorXd w = Eigen::VectorXd::Zero(flat.space.dim());
  for (int i = 1; i + 1 < w.size(); ++i) w[i] = 0.01 * i;
  const BoundaryCurve moved = update_boundary(flat, w);
  EXPECT_LE((moved.y_coeffs - flat.y_coeffs - w).cwiseAbs().maxCoeff(), 1e-14);
  const BoundaryCurve same = update_boundary(flat, Eigen::VectorXd::Zero(w.size()));
  EXPECT_LE((same.y_coeffs - flat.y_coeffs).cwiseAbs().maxCoeff(), 0.0);
}

TEST(UpdateBoundary, MidSpanDisplacementOnParabola) {
  const BoundaryCurve c = curve_on(8, 2, parabola);
  const double amp = 0.01;
  const Eigen::VectorXd w = l2_project([amp](double t) { return amp * std::sin(3.141592653589793 * t); }, c.space,
                                       ProjectionOptions{{}, true, 0});
  const double w_mid = evaluate(c.space, w, 0.5);
  const BoundaryCurve moved = update_boundary(c, w);
  EXPECT_NEAR(moved.y(0.5) - c.y(0.5), w_mid, 1e-3 * std::abs(w_mid));
  EXPECT_NEAR(moved.y(0.0), c.y(0.0), 1e-15);
  EXPECT_NEAR(moved.y(1.0), c.y(1.0), 1e-15);
}

TEST(Run, Test1ReachesMachinePrecisionOnCoarsestMesh) {
  SolverConfig c = config(Algorithm::decoupled, 2, 1);
  c.max_iter = 15;
  const ConvergenceHistory h = run(c, test1_problem().problem);
  ASSERT_EQ(h.status, Status::converged) << h.message;
  EXPECT_LE(h.records.size(), 15u);
  EXPECT_LE(h.records.back().dirichlet_error, 1e-10);
  EXPECT_LE(h.records.back().surface_error, 1e-10);
}

TEST(Run, ExactStartIsFixedPoint) {
  for (Algorithm a : {Algorithm::coupled, Algorithm::decoupled, Algorithm::collocation}) {
    SolverConfig c = config(a, 2, 2);
    c.tol = 1e-9;
    c.initial_boundary = parabola;
    const ConvergenceHistory h = run(c, test1_problem().problem);
    ASSERT_EQ(h.status, Status::converged) << to_string(a) << ": " << h.message;
    EXPECT_EQ(h.records.size(), 1u);
    EXPECT_LE(h.records.front().update_norm, 1e-9);
  }
}

TEST(Run, MaxIterOne) {
  SolverConfig c = config(Algorithm::coupled, 2, 1);
  c.max_iter = 1;
  const ConvergenceHistory h = run(c, test1_problem().problem);
  EXPECT_EQ(h.status, Status::max_iter);
  EXPECT_EQ(h.records.size(), 1u);
}

TEST(Run, MonotoneTailOnTest1) {
  for (Algorithm a : {Algorithm::coupled, Algorithm::decoupled, Algorithm::collocation}) {
    SolverConfig c = config(a, 2, 8);
    c.tol = 1e-14;
    c.max_iter = 15;
    const ConvergenceHistory h = run(c, test1_problem().problem);
    std::size_t end = 0;
    while (end < h.records.size() && h.records[end].dirichlet_error > 1e-12) ++end;
    ASSERT_GE(end, 3u) << to_string(a);
    for (std::size_t k = end - 2; k < end; ++k)
      EXPECT_LT(h.records[k].dirichlet_error, h.records[k - 1].dirichlet_error) << to_string(a) << " iter " << k;
  }
}

TEST(Run, InvalidSetupIsReported) {
  SolverConfig c = config(Algorithm::decoupled, 2, 2);
  c.tol = 0.0;
  ConvergenceHistory h = run(c, test1_problem().problem);
  EXPECT_EQ(h.status, Status::failed);
  EXPECT_TRUE(h.records.empty());
  EXPECT_NE(h.message.find("tol"), std::string::npos);

  c = config(Algorithm::decoupled, 2, 2);
  c.initial_boundary = [](double x) { return x - 0.5; };
  h = run(c, test1_problem().problem);
  EXPECT_EQ(h.status, Status::failed);

  c = config(Algorithm::decoupled, 1, 2);
  EXPECT_EQ(run(c, test1_problem().problem).status, Status::failed);
}

TEST(Run, DataErrorNamesIteration) {
  ProblemData pb = test1_problem().problem;
  pb.g = [](const Vec2&) { return -1.0; };
  const ConvergenceHistory h = run(config(Algorithm::coupled, 2, 2), pb);
  EXPECT_EQ(h.status, Status::failed);
  EXPECT_NE(h.message.find("iteration 1"), std::string::npos);
}

TEST(Run, PlateauDetection) {
  std::vector<IterationRecord> r(5);
  for (std::size_t k = 0; k < r.size(); ++k) r[k].update_norm = 1.0 / (k + 1);
  EXPECT_FALSE(is_plateau(r));
  for (std::size_t k = 1; k < r.size(); ++k) r[k].update_norm = 1e-3 * (1.0 + 1e-3 * k);
  EXPECT_TRUE(is_plateau(r));
}

TEST(HistoryCsv, FormatAndRoundTrip) {
  SolverConfig c = config(Algorithm::decoupled, 2, 1);
  const ConvergenceHistory h = run(c, test1_problem().problem);
  std::stringstream ss;
  write_history_csv(ss, h);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "iter,dirichlet_error,surface_error,update_norm,wall_time_s");
  std::size_t rows = 0;
  while (std::getline(ss, line)) {
    const IterationRecord& r = h.records[rows++];
    std::stringstream ls(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(ls, field, ',')) f.push_back(field);
    ASSERT_EQ(f.size(), 5u);
    EXPECT_EQ(std::stoi(f[0]), r.iter);
    EXPECT_NE(f[1].find('e'), std::string::npos);
    const std::string mantissa = f[1].substr(0, f[1].find('e'));
    EXPECT_GE(mantissa.size() - (mantissa[0] == '-' ? 2 : 1), 12u);
    EXPECT_NEAR(std::stod(f[1]), r.dirichlet_error, 1e-14 * r.dirichlet_error);
    EXPECT_NEAR(std::stod(f[3]), r.update_norm, 1e-14 * r.update_norm);
  }
  EXPECT_EQ(rows, h.records.size());
  EXPECT_EQ(format_sci(std::nan("")), "nan");
}
