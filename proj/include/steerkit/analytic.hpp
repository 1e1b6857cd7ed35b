#pragma once

// Closed-form steerability of X-states and of the named families.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "steerkit/optimizer.hpp"

namespace steerkit {

/// Diagonal of U and third component of V for an X-state.
struct XDerived {
  double u1 = 0, u2 = 0, u3 = 0, t3 = 0;
};

/// u1 = c1/sqrt(1-b3^2), u2 = c2/sqrt(1-b3^2), u3 = (a3 b3 - c3)/(b3^2 - 1),
/// t3 = (a3 - b3 c3)/(1 - b3^2), with a3 and b3 exchanged for BtoA.
inline XDerived x_derived(const XStateParams& params, Direction direction,
                          const Tolerances& tol = {}) {
  const XStateParams p = params.oriented(direction);
  const double gap = 1 - p.b3 * p.b3;
  if (gap < tol.inv)
    throw Error(ErrorCode::SteeredStateSingular,
                "steered party's reduced state is (nearly) pure: 1 - b3^2 = " + std::to_string(gap),
                gap);
  const double w = std::sqrt(gap);
  return {p.c1 / w, p.c2 / w, (p.a3 * p.b3 - p.c3) / (p.b3 * p.b3 - 1),
          (p.a3 - p.b3 * p.c3) / gap};
}

/// The three candidate values of the X-state steerability, attained at the
/// measurement pairs (x, y), (x, z) and (y, z) respectively.
inline std::array<double, 3> delta_values(const XDerived& d, const Tolerances& tol = {}) {
  double radicand = ((1 - d.t3) * (1 - d.t3) - d.u3 * d.u3) * ((1 + d.t3) * (1 + d.t3) - d.u3 * d.u3);
  if (radicand < -tol.radicand)
    throw Error(ErrorCode::DomainError, "negative radicand in the (x,z)/(y,z) branches", radicand);
  const double root = std::sqrt(std::max(radicand, 0.0));
  const double u1s = d.u1 * d.u1, u2s = d.u2 * d.u2, u3s = d.u3 * d.u3, t3s = d.t3 * d.t3;
  return {
      u1s + u2s - 1,
      0.5 * (u1s * (u3s - t3s) + u1s + u3s + t3s - 1 - (1 - u1s) * root),
      0.5 * (u2s * (u3s - t3s) + u2s + u3s + t3s - 1 - (1 - u2s) * root),
  };
}

enum class AxisPair { xy, xz, yz };

constexpr std::string_view to_string(AxisPair p) {
  switch (p) {
    case AxisPair::xy: return "xy";
    case AxisPair::xz: return "xz";
    case AxisPair::yz: return "yz";
  }
  return "unknown";
}

inline std::array<double, 4> axis_pair_angles(AxisPair p) {
  const auto x = MeasurementDirection::x_axis(), y = MeasurementDirection::y_axis(),
             z = MeasurementDirection::z_axis();
  switch (p) {
    case AxisPair::xy: return {x.alpha, x.beta, y.alpha, y.beta};
    case AxisPair::xz: return {x.alpha, x.beta, z.alpha, z.beta};
    case AxisPair::yz: return {y.alpha, y.beta, z.alpha, z.beta};
  }
  return {};
}

/// s = max(D1, D2, D3, 0). Exact for zero-states, a lower bound otherwise.
/// Angles are those of the winning axis pair; equal maxima go to the
/// lower-index pair.
inline SteeringResult steerability_x_analytic(const XStateParams& p, Direction direction,
                                              const Tolerances& tol = {}) {
  const auto deltas = delta_values(x_derived(p, direction, tol), tol);
  const double top = *std::max_element(deltas.begin(), deltas.end());
  // The three branches come from different expressions, so an exact tie
  // shows up as a rounding-level difference.
  std::size_t winner = 0;
  while (deltas[winner] < top - tol.tie) ++winner;
  SteeringResult r;
  r.direction = direction;
  r.method = Method::analytic_xstate;
  r.deltas = deltas;
  r.objective_at_opt = top;
  r.s = std::max(top, 0.0);
  r.angles = axis_pair_angles(static_cast<AxisPair>(winner));
  return r;
}

// ---------------------------------------------------------------------------
// Zero-state classification

enum class ZeroVerdict { certified_t3_zero, numerically_consistent, inconsistent };

constexpr std::string_view to_string(ZeroVerdict v) {
  switch (v) {
    case ZeroVerdict::certified_t3_zero: return "certified_t3_zero";
    case ZeroVerdict::numerically_consistent: return "numerically_consistent";
    case ZeroVerdict::inconsistent: return "inconsistent";
  }
  return "unknown";
}

struct ZeroStateClass {
  ZeroVerdict verdict = ZeroVerdict::inconsistent;
  /// |analytic - numeric|; 0 when certified without a numeric run.
  double gap = 0;
  double t3 = 0;
  SteeringResult analytic;
  std::optional<SteeringResult> numeric;
};

/// t3 = 0 certifies the closed form. Otherwise the closed form is compared
/// against the numeric optimum.
inline ZeroStateClass classify_zero_state(const XStateParams& p, Direction direction,
                                          const OptimizerConfig& cfg = {},
                                          const Tolerances& tol = {}) {
  ZeroStateClass out;
  out.t3 = x_derived(p, direction, tol).t3;
  out.analytic = steerability_x_analytic(p, direction, tol);
  if (std::abs(out.t3) <= tol.zero_t3) {
    out.verdict = ZeroVerdict::certified_t3_zero;
    return out;
  }
  out.numeric = maximize_steerability(compute_map(p.pauli(), direction, tol), cfg, tol);
  out.gap = std::abs(out.analytic.s - out.numeric->s);
  out.verdict = out.gap <= tol.zero_gap ? ZeroVerdict::numerically_consistent
                                        : ZeroVerdict::inconsistent;
  return out;
}

// ---------------------------------------------------------------------------
// Family closed forms

struct FamilySteerability {
  double s = 0;
  bool steerable = false;
  /// Identifier of the inequality that decides steerability.
  std::string threshold_expr;
};

namespace closed_form {

inline double w_v_theta(double v, double theta, Direction d) {
  const double k2 = (1 - 2 * v) * (1 - 2 * v);
  if (d == Direction::AtoB) return k2;
  const double c2 = std::pow(std::cos(2 * theta), 2), s2 = std::pow(std::sin(2 * theta), 2);
  const double den = 1 - k2 * c2;
  return std::max({(k2 - c2) / den, s2 * (k2 - c2) / (den * den), 0.0});
}

inline double w_eta_chi(double eta, double chi, Direction d) {
  if (d == Direction::AtoB) {
    const double num = 1 + eta * (-2 + chi);
    return std::max({num / (-1 + eta * chi),
                     eta * num * (-1 + chi) / ((1 - eta * chi) * (1 - eta * chi)), 0.0});
  }
  const double num = -1 + eta + eta * chi;
  const double den = 1 + eta * (-1 + chi);
  return std::max({eta * chi * num / (den * den), num / den, 0.0});
}

/// AtoB: (2c3 - 1 - b3)/(1 - b3). BtoA: the larger of (b3 + c3)/(2 + b3 - c3)
/// and (1 + b3)(b3 + c3)/(2 + b3 - c3)^2.
inline double rho_x0(double b3, double c3, Direction d) {
  if (d == Direction::AtoB) return std::max((2 * c3 - 1 - b3) / (1 - b3), 0.0);
  const double den = 2 + b3 - c3;
  return std::max({(b3 + c3) / den, (1 + b3) * (b3 + c3) / (den * den), 0.0});
}

inline double colour_noise(double v, double theta) {
  const double s2 = std::pow(std::sin(2 * theta), 2), c2 = std::pow(std::cos(2 * theta), 2);
  return v * v * s2 / (1 - v * v * c2);
}

/// The (x,z) branch specialised to V|psi(theta)><psi(theta)| + (1-V) I/4,
/// which dominates the (x,y) branch for this family.
inline double gen_isotropic(double v, double theta) {
  const double c2 = std::pow(std::cos(2 * theta), 2);
  const double q = std::sqrt((1 + v) * (1 + v) - 4 * v * v * c2);
  const double v2 = v * v, v4 = v2 * v2;
  const double num = 2 * c2 * c2 * v4 - 2 * c2 * v4 - 4 * c2 * v2 * v + 2 * c2 * v2 + v4 + 2 * v2 -
                     1 - (1 - v) * (1 - v) * (1 + v) * q;
  const double den = 1 - v2 * c2;
  return std::max(num / (2 * den * den), 0.0);
}

/// 1 + (1-V) sqrt((1+V)^2 - 4V^2 cos^2 2t) < V^2 (1 + 2 sin^2 2t)
inline bool gen_isotropic_condition(double v, double theta) {
  const double c2 = std::pow(std::cos(2 * theta), 2), s2 = std::pow(std::sin(2 * theta), 2);
  return 1 + (1 - v) * std::sqrt((1 + v) * (1 + v) - 4 * v * v * c2) < v * v * (1 + 2 * s2);
}

inline double bell_diagonal(double c1, double c2, double c3) {
  std::array<double, 3> sq{c1 * c1, c2 * c2, c3 * c3};
  std::sort(sq.begin(), sq.end());
  return std::max(sq[1] + sq[2] - 1, 0.0);
}

}  // namespace closed_form

/// Closed-form steerability of a named family in the given direction.
inline FamilySteerability family_steerability(Family f, const FamilyParams& params,
                                              Direction d, const Tolerances& tol = {}) {
  const XStateParams x = family_x_params(f, params);  // domain checks
  auto get = [&](std::string_view k) { return params.find(k)->second; };
  FamilySteerability out;
  switch (f) {
    case Family::pure: {
      const double a = get("a");
      const bool entangled = std::abs(a) > 0 && std::abs(a) < 1;
      out.s = entangled ? 1.0 : 0.0;
      out.threshold_expr = "0<|a|<1";
      break;
    }
    case Family::bell_diagonal:
      out.s = closed_form::bell_diagonal(x.c1, x.c2, x.c3);
      out.threshold_expr = "N>2";
      break;
    case Family::x_state:
      out.s = steerability_x_analytic(x, d, tol).s;
      out.threshold_expr = "max(D1,D2,D3)>0";
      break;
    case Family::rho_x0:
      out.s = closed_form::rho_x0(get("b3"), get("c3"), d);
      out.threshold_expr = d == Direction::AtoB ? "2c3-1-b3>0" : "(1+b3)(b3+c3)>0";
      break;
    case Family::w_eta_chi:
      out.s = closed_form::w_eta_chi(get("eta"), get("chi"), d);
      out.threshold_expr = d == Direction::AtoB ? "eta>1/(2-chi)" : "eta>1/(1+chi)";
      break;
    case Family::w_v_theta:
      out.s = closed_form::w_v_theta(get("V"), get("theta"), d);
      out.threshold_expr = d == Direction::AtoB ? "V!=1/2" : "|cos2theta|<|2V-1|";
      break;
    case Family::colour_noise:
      out.s = closed_form::colour_noise(get("V"), get("theta"));
      out.threshold_expr = "V*sin2theta!=0";
      break;
    case Family::gen_isotropic:
      out.s = closed_form::gen_isotropic(get("V"), get("theta"));
      out.threshold_expr = "1+(1-V)sqrt((1+V)^2-4V^2cos^2(2theta))<V^2(1+2sin^2(2theta))";
      break;
  }
  out.steerable = out.s > 0;
  return out;
}

}  // namespace steerkit
