#pragma once

// Steering radius of X-states (via the joint-measurement hidden-state
// construction) and the steering-ellipsoid centre and volume.

#include <array>
#include <cmath>
#include <limits>
#include <optional>

#include "steerkit/analytic.hpp"

namespace steerkit {

/// Free parameters of the joint measurement behind the hidden states.
struct RadiusSearchPoint {
  double z1 = 0, z3 = 0, Z = 0;
};

struct HiddenState {
  double weight = 0;
  Vector3 bloch = Vector3::Zero();
};

/// Hidden state (mu, v) for the measurement pair (x, z) or (y, z), in the
/// steering party's frame (use XStateParams::oriented for BtoA). Summing
/// weight * (I + bloch.sigma)/2 over v reproduces Bob's conditional state
/// for outcome mu of the z measurement; summing over mu*v = s reproduces
/// outcome s of the x (or y) measurement.
inline HiddenState hidden_state_bloch(const XStateParams& p, const RadiusSearchPoint& pt,
                                      AxisPair pair, int mu, int v) {
  if (pair == AxisPair::xy)
    throw Error(ErrorCode::InvalidArgument, "hidden states are defined for the xz and yz pairs");
  if ((mu != 1 && mu != -1) || (v != 1 && v != -1))
    throw Error(ErrorCode::InvalidArgument, "mu and v must be +1 or -1");
  const double gap = 1 - p.b3 * p.b3;
  if (gap < 0) throw Error(ErrorCode::DomainError, "|b3| > 1", gap);
  const double den = 1 + mu * p.a3 + v * (p.b3 * pt.z3 + pt.Z);
  if (den <= 1e-12) throw Error(ErrorCode::DegenerateWeight, "hidden-state weight vanishes", den);
  const double corr = pair == AxisPair::xz ? p.c1 : p.c2;
  const double transverse = mu * v * (corr + mu * std::sqrt(gap) * pt.z1);
  const double longitudinal = p.b3 + mu * p.c3 + v * (pt.z3 + p.b3 * pt.Z);
  HiddenState h;
  h.weight = den / 4;
  h.bloch = pair == AxisPair::xz ? Vector3(transverse, 0, longitudinal)
                                 : Vector3(0, transverse, longitudinal);
  h.bloch /= den;
  return h;
}

struct RadiusResult {
  double radius = 0;
  AxisPair branch = AxisPair::xy;
  /// Minimizer for the winning branch; absent when the closed-form xy
  /// branch wins.
  std::optional<RadiusSearchPoint> point;
  /// (r_xy, r_xz, r_yz)
  std::array<double, 3> per_branch{};
  /// The pair-restricted radius is exact for zero-states only.
  bool certified_zero_state = false;
  std::size_t skipped_probes = 0;
};

namespace detail {

inline std::array<double, 4> radius_branches(const XStateParams& p, double corr, const Vector3& z) {
  const double w = std::sqrt(1 - p.b3 * p.b3);
  std::array<double, 4> out{};
  std::size_t k = 0;
  for (int mu : {1, -1})
    for (int v : {1, -1}) {
      const double den = 1 + mu * p.a3 + v * (p.b3 * z(1) + z(2));
      if (den <= 1e-12) {
        out[k++] = std::numeric_limits<double>::infinity();
        continue;
      }
      const double mx = corr + mu * w * z(0);
      const double mz = p.b3 + mu * p.c3 + v * (z(1) + p.b3 * z(2));
      out[k++] = std::sqrt(mx * mx + mz * mz) / den;
    }
  return out;
}

}  // namespace detail

/// R = max(r_xy, r_xz, r_yz) with r_xy = sqrt(c1^2 + c2^2 + b3^2) and the
/// other two obtained by minimizing, over (z1, z3, Z), the largest
/// hidden-state Bloch radius.
inline RadiusResult steering_radius(const XStateParams& params, Direction direction,
                                    const OptimizerConfig& cfg = {}, const Tolerances& tol = {}) {
  const XStateParams p = params.oriented(direction);
  const XDerived d = x_derived(params, direction, tol);  // singular check

  RadiusResult out;
  out.certified_zero_state = std::abs(d.t3) <= tol.zero_t3;
  out.per_branch[0] = std::sqrt(p.c1 * p.c1 + p.c2 * p.c2 + p.b3 * p.b3);

  std::array<Vector3, 2> points;
  for (int b = 0; b < 2; ++b) {
    const double corr = b == 0 ? p.c1 : p.c2;
    const MinMaxResult mm =
        minimize_max([&](const Vector3& z) { return detail::radius_branches(p, corr, z); }, cfg);
    out.per_branch[static_cast<std::size_t>(b + 1)] = mm.value;
    out.skipped_probes += mm.skipped_probes;
    points[static_cast<std::size_t>(b)] = mm.point;
  }

  std::size_t win = 0;
  for (std::size_t i = 1; i < 3; ++i)
    if (out.per_branch[i] > out.per_branch[win]) win = i;
  out.radius = out.per_branch[win];
  out.branch = static_cast<AxisPair>(win);
  if (win > 0) {
    const Vector3& z = points[win - 1];
    out.point = RadiusSearchPoint{z(0), z(1), z(2)};
  }
  return out;
}

struct EllipsoidResult {
  double center_z = 0;
  double volume = 0;
};

/// Ellipsoid of the steered party's conditional Bloch vectors. AtoB gives
/// Bob's ellipsoid (Alice measures): centre (b3 - a3 c3)/(1 - a3^2), volume
/// 4pi/3 |c1 c2 (c3 - a3 b3)| / (1 - a3^2)^2. BtoA exchanges a3 and b3.
inline EllipsoidResult steering_ellipsoid(const XStateParams& params, Direction direction,
                                          const Tolerances& tol = {}) {
  const XStateParams p = params.oriented(direction);
  const double gap = 1 - p.a3 * p.a3;
  if (gap < tol.inv)
    throw Error(ErrorCode::SteeredStateSingular,
                "measuring party's reduced state is (nearly) pure: 1 - a3^2 = " +
                    std::to_string(gap),
                gap);
  EllipsoidResult e;
  e.center_z = (p.b3 - p.a3 * p.c3) / gap;
  e.volume = 4 * std::numbers::pi / 3 * std::abs(p.c1 * p.c2 * (p.c3 - p.a3 * p.b3)) / (gap * gap);
  return e;
}

}  // namespace steerkit
