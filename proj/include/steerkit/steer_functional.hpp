#pragma once

// The steering <-> joint-measurability correspondence for two binary
// measurements: the map (U, V) taking a measurement direction n to Bob's
// unsharp observable O(x, g) with x = V.n and g = U n, and the
// joint-measurability functional S1 - S2 evaluated on a pair of them.

#include <cmath>

#include "steerkit/qstate.hpp"

namespace steerkit {

/// n = (sin a cos b, sin a sin b, cos a)
struct MeasurementDirection {
  double alpha = 0;
  double beta = 0;

  Vector3 n() const {
    return {std::sin(alpha) * std::cos(beta), std::sin(alpha) * std::sin(beta), std::cos(alpha)};
  }

  /// Angles of a nonzero vector, alpha in [0, pi], beta in [0, 2 pi).
  static MeasurementDirection from_vector(const Vector3& v) {
    const Vector3 u = v.normalized();
    double beta = std::atan2(u.y(), u.x());
    if (beta < 0) beta += 2 * std::numbers::pi;
    if (std::hypot(u.x(), u.y()) == 0.0) beta = 0.0;
    return {std::acos(std::clamp(u.z(), -1.0, 1.0)), beta};
  }

  static MeasurementDirection x_axis() { return {std::numbers::pi / 2, 0}; }
  static MeasurementDirection y_axis() { return {std::numbers::pi / 2, std::numbers::pi / 2}; }
  static MeasurementDirection z_axis() { return {0, 0}; }
};

struct SteeringMap {
  Matrix3 U = Matrix3::Zero();
  Vector3 V = Vector3::Zero();
  Direction direction = Direction::AtoB;
  /// The state as given (before any party exchange for BtoA).
  PauliRepresentation source;
};

/// O_k(x, g) = 1/2 ((1 + (-1)^k x) I + (-1)^k g.sigma)
struct AssemblageObservable {
  double x = 0;
  Vector3 g = Vector3::Zero();
};

/// Builds (U, V) for the measuring party given by `direction`. With
/// M = T^T the matrix taking Alice's direction to Bob's Bloch shift,
///   U = b a^T/(|b|^2 - 1) + b b^T M / ((1 + w)(1 - |b|^2)) + M / w,
///   V = (a - M^T b) / (1 - |b|^2),   w = sqrt(1 - |b|^2).
/// BtoA exchanges the parties first.
inline SteeringMap compute_map(const PauliRepresentation& p, Direction direction,
                               const Tolerances& tol = {}) {
  const PauliRepresentation q = direction == Direction::AtoB ? p : swap_parties(p);
  const double b2 = q.b.squaredNorm();
  const double gap = 1.0 - b2;
  if (gap < tol.inv)
    throw Error(ErrorCode::SteeredStateSingular,
                "steered party's reduced state is (nearly) pure: 1 - |b|^2 = " +
                    std::to_string(gap),
                gap);
  const double w = std::sqrt(gap);
  const Matrix3 m = q.T.transpose();

  SteeringMap out;
  // (-1 + w) / (|b|^2 (|b|^2 - 1)) rewritten without the 0/0 at b = 0
  out.U = q.b * q.a.transpose() / (b2 - 1.0) + q.b * q.b.transpose() * m / ((1.0 + w) * gap) +
          m / w;
  out.V = (q.a - m.transpose() * q.b) / gap;
  out.direction = direction;
  out.source = p;
  return out;
}

inline SteeringMap compute_map(const CanonicalState& s, Direction direction,
                               const Tolerances& tol = {}) {
  return compute_map(s.pauli(), direction, tol);
}

inline SteeringMap compute_map(const DensityMatrix& rho, Direction direction,
                               const Tolerances& tol = {}) {
  return compute_map(to_pauli(rho), direction, tol);
}

inline AssemblageObservable assemblage(const SteeringMap& map, const MeasurementDirection& dir,
                                       const Tolerances& tol = {}) {
  const Vector3 n = dir.n();
  AssemblageObservable o{map.V.dot(n), map.U * n};
  const double excess = o.g.norm() - (1.0 - std::abs(o.x));
  if (excess > tol.positivity)
    throw Error(ErrorCode::UnphysicalAssemblage,
                "|g| exceeds 1 - |x| by " + std::to_string(excess), excess);
  return o;
}

/// F = 1/2 (sqrt((1+x)^2 - g^2) + sqrt((1-x)^2 - g^2))
inline double unsharp_f(double x, double g_norm, const Tolerances& tol = {}) {
  double plus = (1 + x) * (1 + x) - g_norm * g_norm;
  double minus = (1 - x) * (1 - x) - g_norm * g_norm;
  if (plus < -tol.radicand || minus < -tol.radicand)
    throw Error(ErrorCode::DomainError, "negative radicand in F", std::min(plus, minus));
  plus = std::max(plus, 0.0);
  minus = std::max(minus, 0.0);
  return 0.5 * (std::sqrt(plus) + std::sqrt(minus));
}

namespace detail {

// Per-observable quantities entering the functional.
struct ObservableTerms {
  double x = 0;
  Vector3 g = Vector3::Zero();
  double f2 = 1;     // F^2
  double ratio = 0;  // x^2 / F^2 (0/0 -> 0)
  bool sharp_biased = false;
};

inline ObservableTerms terms(double x, const Vector3& g, const Tolerances& tol) {
  ObservableTerms t;
  t.x = x;
  t.g = g;
  const double g2 = g.squaredNorm();
  const double plus = std::max((1 + x) * (1 + x) - g2, 0.0);
  const double minus = std::max((1 - x) * (1 - x) - g2, 0.0);
  const double f = 0.5 * (std::sqrt(plus) + std::sqrt(minus));
  t.f2 = f * f;
  if (f < tol.ratio_f) {
    if (std::abs(x) < tol.ratio_x)
      t.ratio = 0.0;
    else
      t.sharp_biased = true;
  } else {
    t.ratio = x * x / t.f2;
  }
  return t;
}

inline ObservableTerms terms(const SteeringMap& map, const Vector3& n, const Tolerances& tol) {
  return terms(map.V.dot(n), map.U * n, tol);
}

inline double functional(const ObservableTerms& t0, const ObservableTerms& t1) {
  if (t0.sharp_biased || t1.sharp_biased) return kSharpBiasedSentinel;
  const double s1 = (1 - t0.f2 - t1.f2) * (1 - t0.ratio - t1.ratio);
  const double overlap = t0.g.dot(t1.g) - t0.x * t1.x;
  return s1 - overlap * overlap;
}

}  // namespace detail

/// S1 - S2 for Alice (or Bob, per map.direction) measuring along n0 and n1.
/// Positive values witness steering. Returns kSharpBiasedSentinel when a
/// sharp observable (F = 0) has nonzero bias.
inline double steering_objective(const SteeringMap& map, const MeasurementDirection& n0,
                                 const MeasurementDirection& n1, const Tolerances& tol = {}) {
  return detail::functional(detail::terms(map, n0.n(), tol), detail::terms(map, n1.n(), tol));
}

/// Vector form used by the optimizers; n0, n1 need not be normalized
/// beyond what the caller guarantees.
inline double steering_objective(const SteeringMap& map, const Vector3& n0, const Vector3& n1,
                                 const Tolerances& tol = {}) {
  return detail::functional(detail::terms(map, n0, tol), detail::terms(map, n1, tol));
}

inline bool is_jointly_measurable(const AssemblageObservable& o0, const AssemblageObservable& o1,
                                  const Tolerances& tol = {}) {
  const double lhs =
      detail::functional(detail::terms(o0.x, o0.g, tol), detail::terms(o1.x, o1.g, tol));
  return lhs <= tol.jm;
}

}  // namespace steerkit
