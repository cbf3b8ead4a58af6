#pragma once

#include <functional>

#include <Eigen/Dense>

namespace fbiga {

enum class BcKind { dirichlet_lateral, periodic_lateral };

using ScalarField = std::function<double(const Eigen::Vector2d&)>;
using VectorField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

/// Data of -Δu = f in Ω, u = h on Γ_D (and lateral sides when Dirichlet),
/// u = h0 and ∂_n u = g on the free boundary.
struct ProblemData {
  ScalarField f;
  ScalarField g;
  VectorField grad_g;
  ScalarField h_fixed;  // Dirichlet datum on the bottom (and lateral sides)
  double h0 = 1.0;      // constant datum on the free boundary
  BcKind bc_kind = BcKind::dirichlet_lateral;
  /// Exact free boundary y = 1 + alpha(x), when known.
  std::function<double(double)> exact_alpha;
};

}  // namespace fbiga
