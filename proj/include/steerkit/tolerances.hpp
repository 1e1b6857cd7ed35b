#pragma once

namespace steerkit {

/// All clamping and acceptance thresholds used by the library. Passed
/// explicitly so that a dataset can be regenerated with the exact record
/// that produced it.
struct Tolerances {
  // density-matrix validation
  double hermitian = 1e-10;
  double trace = 1e-10;
  double psd = 1e-10;

  // the steering map is undefined when the steered party's reduced state
  // is pure; 1 - |b|^2 must stay above this
  double inv = 1e-6;

  // radicands in [-radicand, 0) are clamped to 0
  double radicand = 1e-12;
  // |g| may exceed 1 - |x| by this much before the assemblage is rejected
  double positivity = 1e-9;
  // F below this (with |x| below ratio_x) makes x^2/F^2 evaluate to 0
  double ratio_f = 1e-9;
  double ratio_x = 1e-9;
  // joint-measurability left-hand side threshold
  double jm = 1e-12;

  // zero-state classification
  double zero_t3 = 1e-10;
  double zero_gap = 1e-4;
  // closed-form branch values this close count as tied
  double tie = 1e-12;

  // structural checks (X-state shape, diagonal correlation matrix)
  double structure = 1e-12;
};

/// Returned by the objective in place of -infinity when a sharp observable
/// carries a nonzero bias.
inline constexpr double kSharpBiasedSentinel = -1e18;

}  // namespace steerkit
