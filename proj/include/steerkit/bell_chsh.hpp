#pragma once

// Maximal CHSH violation, its relation to steerability, and the (N, S)
// region scan over zero-states.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "steerkit/analytic.hpp"

namespace steerkit {

namespace detail {

// Cyclic Jacobi sweeps for a symmetric 3x3 matrix.
inline Vector3 jacobi_eigenvalues(Matrix3 a) {
  for (int sweep = 0; sweep < 64; ++sweep) {
    const double off = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
    if (off < 1e-30) break;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        Matrix3 rot = Matrix3::Identity();
        rot(p, p) = rot(q, q) = c;
        rot(p, q) = s;
        rot(q, p) = -s;
        a = rot.transpose() * a * rot;
      }
  }
  return a.diagonal();
}

}  // namespace detail

/// Eigenvalues of a real symmetric 3x3 matrix in descending order. Uses the
/// trigonometric solution of the characteristic cubic, and Jacobi sweeps
/// when the cubic's discriminant is below 1e-12 (near-repeated roots).
inline Vector3 symmetric_eigenvalues(const Matrix3& m) {
  const Matrix3 a = 0.5 * (m + m.transpose());
  const double p1 = a(0, 1) * a(0, 1) + a(0, 2) * a(0, 2) + a(1, 2) * a(1, 2);
  const double q = a.trace() / 3;
  const double p2 = std::pow(a(0, 0) - q, 2) + std::pow(a(1, 1) - q, 2) + std::pow(a(2, 2) - q, 2) +
                    2 * p1;
  const double p = std::sqrt(p2 / 6);
  Vector3 ev;
  bool closed = false;
  if (p > 0) {
    const Matrix3 b = (a - q * Matrix3::Identity()) / p;
    const double r = std::clamp(b.determinant() / 2, -1.0, 1.0);
    // depressed cubic t^3 - 3p^2 t - 2p^3 r: discriminant 108 p^6 (1 - r^2)
    const double disc = 108 * std::pow(p, 6) * (1 - r * r);
    if (std::abs(disc) >= 1e-12) {
      const double phi = std::acos(r) / 3;
      ev(0) = q + 2 * p * std::cos(phi);
      ev(2) = q + 2 * p * std::cos(phi + 2 * std::numbers::pi / 3);
      ev(1) = 3 * q - ev(0) - ev(2);
      closed = true;
    }
  }
  if (!closed) ev = detail::jacobi_eigenvalues(a);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return ev;
}

/// N = 2 sqrt(tau1 + tau2), tau1 >= tau2 the two largest eigenvalues of T^T T.
inline double chsh_max(const PauliRepresentation& p) {
  const Vector3 tau = symmetric_eigenvalues(p.T.transpose() * p.T).cwiseMax(0.0);
  return std::min(2 * std::sqrt(tau(0) + tau(1)), 2 * std::numbers::sqrt2);
}

/// max(N^2/4 - 1, 0) for the Bell-diagonal state with correlations c.
inline double bell_diagonal_steerability(const Vector3& c, const Tolerances& tol = {}) {
  const std::array<double, 4> weights{
      (1 - c(0) - c(1) - c(2)) / 4, (1 - c(0) + c(1) + c(2)) / 4,
      (1 + c(0) - c(1) + c(2)) / 4, (1 + c(0) + c(1) - c(2)) / 4};
  const double lowest = *std::min_element(weights.begin(), weights.end());
  if (lowest < -tol.psd)
    throw Error(ErrorCode::ParamOutOfDomain, "c lies outside the Bell-diagonal tetrahedron", lowest);
  PauliRepresentation p;
  p.T = c.asDiagonal();
  const double n = chsh_max(p);
  return std::max(n * n / 4 - 1, 0.0);
}

// ---------------------------------------------------------------------------

struct RegionSample {
  double n_value = 0;
  double s_value = 0;
  XStateParams params;
  ZeroVerdict verdict = ZeroVerdict::certified_t3_zero;
};

struct CorollaryCheck {
  /// The S <= N/2 bound only speaks about N <= 2.
  bool applies = false;
  bool upper_ok = true;
  double slack = 0;  // N/2 - S
};

inline CorollaryCheck corollary_bounds(const RegionSample& sample) {
  CorollaryCheck out;
  out.slack = sample.n_value / 2 - sample.s_value;
  out.applies = sample.n_value <= 2;
  out.upper_ok = !out.applies || sample.s_value <= sample.n_value / 2 + 1e-9;
  return out;
}

/// Relative weights of the three ways a region sample is drawn.
struct RegionMix {
  /// a3 = b3 = 0
  double bell_diagonal = 1;
  /// a3 = b3 c3, so t3 = 0
  double t3_zero = 3;
  /// unconstrained X-state, kept when the numeric optimum confirms the
  /// closed form (costs one numeric optimization per draw)
  double generic = 0;
};

struct RegionSamplerConfig {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  RegionMix mix;
  Direction direction = Direction::AtoB;
  /// Draws are abandoned after count * max_draw_factor attempts.
  std::size_t max_draw_factor = 1000;
};

namespace detail {

// splitmix64: portable and reproducible across standard libraries.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  /// uniform in [lo, hi)
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

inline bool x_state_physical(const XStateParams& x, double eps) {
  const double p00 = (1 + x.a3 + x.b3 + x.c3) / 4, p11 = (1 - x.a3 - x.b3 + x.c3) / 4;
  const double p01 = (1 + x.a3 - x.b3 - x.c3) / 4, p10 = (1 - x.a3 + x.b3 - x.c3) / 4;
  const double o1 = (x.c1 - x.c2) / 4, o2 = (x.c1 + x.c2) / 4;
  return std::min({p00, p11, p01, p10}) >= -eps && p00 * p11 - o1 * o1 >= -eps &&
         p01 * p10 - o2 * o2 >= -eps;
}

}  // namespace detail

/// Seeded scatter of (N, S) over physical X-state zero-states. Samples are
/// emitted in draw order; the output is identical for identical configs.
inline std::vector<RegionSample> region_scan(const RegionSamplerConfig& cfg,
                                             const OptimizerConfig& opt = {},
                                             const Tolerances& tol = {}) {
  std::vector<RegionSample> out;
  if (cfg.count == 0) return out;
  out.reserve(cfg.count);
  const double total = cfg.mix.bell_diagonal + cfg.mix.t3_zero + cfg.mix.generic;
  if (!(total > 0) || cfg.mix.bell_diagonal < 0 || cfg.mix.t3_zero < 0 || cfg.mix.generic < 0)
    throw Error(ErrorCode::InvalidArgument, "region mix weights must be >= 0 with a positive sum");

  detail::SplitMix rng(cfg.seed);
  const std::size_t max_draws = cfg.count * cfg.max_draw_factor;
  for (std::size_t draw = 0; draw < max_draws && out.size() < cfg.count; ++draw) {
    const double pick = rng.uniform(0, total);
    XStateParams x;
    x.c1 = rng.uniform(-1, 1);
    x.c2 = rng.uniform(-1, 1);
    x.c3 = rng.uniform(-1, 1);
    const double u = rng.uniform(-1, 1), v = rng.uniform(-1, 1);
    const bool generic = pick >= cfg.mix.bell_diagonal + cfg.mix.t3_zero;
    if (pick < cfg.mix.bell_diagonal) {
      x.a3 = x.b3 = 0;
    } else if (!generic) {
      // t3 = 0 in the scan direction
      if (cfg.direction == Direction::AtoB) {
        x.b3 = u;
        x.a3 = u * x.c3;
      } else {
        x.a3 = u;
        x.b3 = u * x.c3;
      }
    } else {
      x.a3 = u;
      x.b3 = v;
    }
    if (!detail::x_state_physical(x, 0.0)) continue;
    const double steered = cfg.direction == Direction::AtoB ? x.b3 : x.a3;
    if (1 - steered * steered < tol.inv) continue;

    RegionSample sample;
    sample.params = x;
    sample.n_value = chsh_max(x.pauli());
    if (generic) {
      const ZeroStateClass cls = classify_zero_state(x, cfg.direction, opt, tol);
      if (cls.verdict == ZeroVerdict::inconsistent) continue;
      sample.verdict = cls.verdict;
      sample.s_value = cls.analytic.s;
    } else {
      sample.verdict = ZeroVerdict::certified_t3_zero;
      sample.s_value = steerability_x_analytic(x, cfg.direction, tol).s;
    }
    out.push_back(sample);
  }
  return out;
}

}  // namespace steerkit
