#pragma once

// Manufactured free boundary problems on the unit strip.
//
// All three tests share the exact solution
//
//   u(x, y) = s + alpha(x) s (1 - s),   s = y / (1 + alpha(x)),
//
// which simplifies to u = y - q(x) y^2 with q = alpha / (1 + alpha)^2, and
// equals 1 on the curve y = 1 + alpha(x). The data are f = -Δu and
// g = ∇u · N(x), N the upward unit normal of the exact boundary.
//
// Derivatives of q (a = alpha):
//   q'  = a' (1 - a) / (1 + a)^3
//   q'' = [a'' (1 - a^2) - a'^2 (4 - 2a)] / (1 + a)^4
// and of N = (-a', 1) / r, r = sqrt(1 + a'^2):
//   N1' = -a'' / r^3,   N2' = -a' a'' / r^3

#include <cmath>
#include <functional>
#include <numbers>

#include <Eigen/Dense>

#include "fbiga/errors.hpp"
#include "fbiga/problem.hpp"

namespace fbiga {

struct ManufacturedSolution {
  ScalarField u_ex;
  VectorField grad_u_ex;
  ScalarField laplace_u_ex;
  std::function<double(double)> alpha_ex;
  std::function<double(double)> alpha_prime;
};

struct Benchmark {
  ProblemData problem;
  ManufacturedSolution exact;
};

namespace detail {

struct Profile {
  std::function<double(double)> a, da, dda;
};

struct Hessian2 {
  double xx, xy, yy;
};

inline double q_of(const Profile& p, double x) {
  const double a = p.a(x);
  return a / ((1 + a) * (1 + a));
}

inline double dq_of(const Profile& p, double x) {
  const double a = p.a(x);
  return p.da(x) * (1 - a) / std::pow(1 + a, 3);
}

inline double ddq_of(const Profile& p, double x) {
  const double a = p.a(x), da = p.da(x), dda = p.dda(x);
  return (dda * (1 - a * a) - da * da * (4 - 2 * a)) / std::pow(1 + a, 4);
}

inline Eigen::Vector2d grad_u(const Profile& p, const Eigen::Vector2d& z) {
  const double y = z.y();
  return {-dq_of(p, z.x()) * y * y, 1.0 - 2.0 * q_of(p, z.x()) * y};
}

inline Hessian2 hess_u(const Profile& p, const Eigen::Vector2d& z) {
  const double y = z.y();
  return {-ddq_of(p, z.x()) * y * y, -2.0 * dq_of(p, z.x()) * y, -2.0 * q_of(p, z.x())};
}

inline Benchmark make_benchmark(const Profile& prof, BcKind bc) {
  Benchmark b;
  auto& ex = b.exact;
  ex.alpha_ex = prof.a;
  ex.alpha_prime = prof.da;
  ex.u_ex = [prof](const Eigen::Vector2d& z) { return z.y() - q_of(prof, z.x()) * z.y() * z.y(); };
  ex.grad_u_ex = [prof](const Eigen::Vector2d& z) { return grad_u(prof, z); };
  ex.laplace_u_ex = [prof](const Eigen::Vector2d& z) {
    const Hessian2 h = hess_u(prof, z);
    return h.xx + h.yy;
  };

  auto& pb = b.problem;
  pb.f = [prof](const Eigen::Vector2d& z) {
    const Hessian2 h = hess_u(prof, z);
    return -(h.xx + h.yy);
  };
  pb.g = [prof](const Eigen::Vector2d& z) {
    const double da = prof.da(z.x());
    const double r = std::sqrt(1 + da * da);
    return grad_u(prof, z).dot(Eigen::Vector2d(-da, 1.0)) / r;
  };
  pb.grad_g = [prof](const Eigen::Vector2d& z) {
    const double da = prof.da(z.x()), dda = prof.dda(z.x());
    const double r = std::sqrt(1 + da * da), r3 = r * r * r;
    const Eigen::Vector2d n(-da / r, 1.0 / r);
    const Eigen::Vector2d dn(-dda / r3, -da * dda / r3);
    const Eigen::Vector2d gu = grad_u(prof, z);
    const Hessian2 h = hess_u(prof, z);
    return Eigen::Vector2d(h.xx * n.x() + h.xy * n.y() + gu.dot(dn), h.xy * n.x() + h.yy * n.y());
  };
  pb.h_fixed = [](const Eigen::Vector2d& z) { return z.y(); };
  pb.h0 = 1.0;
  pb.bc_kind = bc;
  pb.exact_alpha = prof.a;
  return b;
}

inline Profile parabola() {
  return {[](double x) { return 0.25 * x * (1 - x); }, [](double x) { return 0.25 - 0.5 * x; },
          [](double) { return -0.5; }};
}

inline Profile sinusoid() {
  using std::numbers::pi;
  return {[](double x) { return std::sin(2 * pi * x) / 16; },
          [](double x) { return pi / 8 * std::cos(2 * pi * x); },
          [](double x) { return -pi * pi / 4 * std::sin(2 * pi * x); }};
}

}  // namespace detail

/// Parabolic free boundary y = 1 + x(1-x)/4, Dirichlet lateral sides.
inline Benchmark test1_problem() { return detail::make_benchmark(detail::parabola(), BcKind::dirichlet_lateral); }

/// Sinusoidal free boundary y = 1 + sin(2πx)/16, Dirichlet lateral sides.
inline Benchmark test2_problem() { return detail::make_benchmark(detail::sinusoid(), BcKind::dirichlet_lateral); }

/// Test 2 data with periodic lateral sides.
inline Benchmark test3_problem() { return detail::make_benchmark(detail::sinusoid(), BcKind::periodic_lateral); }

inline Benchmark benchmark_problem(int test) {
  switch (test) {
    case 1: return test1_problem();
    case 2: return test2_problem();
    case 3: return test3_problem();
    default: throw ArgumentError("benchmark_problem: test must be 1, 2 or 3");
  }
}

}  // namespace fbiga
