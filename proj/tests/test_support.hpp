#pragma once

// Shared helpers for the test binaries: seeded random states, local
// unitaries and independent reference computations that do not go through
// the library's own formulas.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>

#include "steerkit/steerkit.hpp"

namespace steerkit::testing {

using Matrix2c = steerkit::Matrix2c;
using Matrix4c = steerkit::Matrix4c;

/// Random full-rank state: G G^dagger / tr, G with Gaussian entries.
inline Matrix4c random_density(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix4c m;
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) m(i, k) = Complex(g(rng), g(rng));
  Matrix4c rho = m * m.adjoint();
  return rho / rho.trace();
}

/// Random state whose steered (Bob) reduced state stays away from purity.
inline Matrix4c random_mixed_density(std::mt19937_64& rng, double mix = 0.3) {
  return (1 - mix) * random_density(rng) + mix * Matrix4c::Identity() / 4.0;
}

/// Haar-ish SU(2) element from a normalized Gaussian quaternion.
inline Matrix2c random_su2(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Vector4d q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  Matrix2c u;
  u << Complex(q(0), q(3)), Complex(q(2), q(1)), Complex(-q(2), q(1)), Complex(q(0), -q(3));
  return u;
}

inline Matrix3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Matrix4c local_unitary(const Matrix4c& rho, const Matrix2c& ua, const Matrix2c& ub) {
  const Matrix4c u = pauli::kron(ua, ub);
  return u * rho * u.adjoint();
}

/// Tr_A[(P (x) I) rho] for a 2x2 operator P on Alice.
inline Matrix2c conditional_bob(const Matrix4c& rho, const Matrix2c& p) {
  Matrix2c out = Matrix2c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) out += p(k, i) * rho.block<2, 2>(2 * i, 2 * k);
  return out;
}

inline Matrix2c bloch_projector(const Vector3& n, int sign) {
  Matrix2c p = pauli::identity();
  for (int k = 0; k < 3; ++k) p += static_cast<double>(sign) * n(k) * pauli::sigma(k);
  return p / 2.0;
}

/// Bob's observable O_0 = rho_B^{-1/2} rho_{0|n} rho_B^{-1/2} written as
/// (x, g) with O_0 = ((1 + x) I + g.sigma)/2, from the matrices directly.
inline AssemblageObservable reference_observable(const Matrix4c& rho, const Vector3& n) {
  const Matrix2c rho_b = conditional_bob(rho, pauli::identity());
  Eigen::SelfAdjointEigenSolver<Matrix2c> eig(rho_b);
  const Eigen::Vector2d inv_sqrt = eig.eigenvalues().cwiseSqrt().cwiseInverse();
  const Matrix2c w =
      eig.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
  const Matrix2c o = w * conditional_bob(rho, bloch_projector(n, +1)) * w;
  AssemblageObservable out;
  out.x = o.trace().real() - 1;
  for (int k = 0; k < 3; ++k) out.g(k) = (o * pauli::sigma(k)).trace().real();
  return out;
}

/// Uniform point in the Bell-diagonal tetrahedron via rejection.
inline Vector3 random_bell_c(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    const Vector3 c(u(rng), u(rng), u(rng));
    if (1 - c(0) - c(1) - c(2) >= 0 && 1 - c(0) + c(1) + c(2) >= 0 &&
        1 + c(0) - c(1) + c(2) >= 0 && 1 + c(0) + c(1) - c(2) >= 0)
      return c;
  }
}

/// Random physical X-state with both reduced states non-singular.
inline XStateParams random_x_state(std::mt19937_64& rng, double margin = 0.05) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (;;) {
    XStateParams x{u(rng), u(rng), u(rng), u(rng), u(rng)};
    if (std::abs(x.a3) > 1 - margin || std::abs(x.b3) > 1 - margin) continue;
    Eigen::SelfAdjointEigenSolver<Matrix4c> eig(x_state_matrix(x));
    if (eig.eigenvalues().minCoeff() >= 0) return x;
  }
}

/// Objective maximum over a plain angle grid (no refinement).
inline double brute_force_max(const SteeringMap& map, int steps) {
  double best = -std::numeric_limits<double>::infinity();
  std::vector<Vector3> dirs;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j < 2 * steps; ++j)
      dirs.push_back(MeasurementDirection{std::numbers::pi * i / steps, std::numbers::pi * j / steps}.n());
  for (const auto& n0 : dirs)
    for (const auto& n1 : dirs) best = std::max(best, steering_objective(map, n0, n1));
  return best;
}

}  // namespace steerkit::testing
