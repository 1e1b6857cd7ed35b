#pragma once

// Two-qubit states: validation, Pauli coordinates, local-unitary canonical
// form and the named state families.
//
// Basis order is |00>, |01>, |10>, |11> with Alice's qubit first.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "steerkit/error.hpp"
#include "steerkit/tolerances.hpp"

namespace steerkit {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Matrix4c = Eigen::Matrix4cd;
using Vector3 = Eigen::Vector3d;
using Matrix3 = Eigen::Matrix3d;

/// Which party measures. AtoB: Alice measures and steers Bob's qubit.
enum class Direction { AtoB, BtoA };

constexpr std::string_view to_string(Direction d) {
  return d == Direction::AtoB ? "AtoB" : "BtoA";
}

namespace pauli {

inline const Matrix2c& identity() {
  static const Matrix2c m = Matrix2c::Identity();
  return m;
}

/// sigma(0..2) = sigma_x, sigma_y, sigma_z
inline const Matrix2c& sigma(int k) {
  static const std::array<Matrix2c, 3> s = [] {
    std::array<Matrix2c, 3> out;
    out[0] << 0, 1, 1, 0;
    out[1] << 0, Complex(0, -1), Complex(0, 1), 0;
    out[2] << 1, 0, 0, -1;
    return out;
  }();
  return s[static_cast<std::size_t>(k)];
}

inline Matrix4c kron(const Matrix2c& left, const Matrix2c& right) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = left(i, j) * right;
  return out;
}

}  // namespace pauli

class DensityMatrix;
DensityMatrix validate_density(const Matrix4c& raw, const Tolerances& tol = {});

/// A validated two-qubit density matrix. Only obtainable through
/// validate_density (directly or via from_pauli / make_family).
class DensityMatrix {
 public:
  const Matrix4c& matrix() const noexcept { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

 private:
  explicit DensityMatrix(Matrix4c m) : m_(std::move(m)) {}
  friend DensityMatrix validate_density(const Matrix4c& raw, const Tolerances& tol);
  Matrix4c m_;
};

/// Checks hermiticity, unit trace and positivity (in that order). The
/// returned matrix is the hermitian part of `raw`; eigenvalues in
/// [-tol.psd, 0) are clamped to zero.
inline DensityMatrix validate_density(const Matrix4c& raw, const Tolerances& tol) {
  if (!raw.allFinite()) throw Error(ErrorCode::NotHermitian, "matrix has non-finite entries");
  const double herm = (raw - raw.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol.hermitian)
    throw Error(ErrorCode::NotHermitian,
                "max |M - M^dagger| = " + std::to_string(herm), herm);

  const double trace_dev = std::abs(raw.trace() - Complex(1.0, 0.0));
  if (trace_dev > tol.trace)
    throw Error(ErrorCode::TraceNotOne, "|tr M - 1| = " + std::to_string(trace_dev),
                trace_dev);

  Matrix4c h = 0.5 * (raw + raw.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix4c> eig(h);
  Eigen::Vector4d ev = eig.eigenvalues();
  const double min_ev = ev.minCoeff();
  if (min_ev < -tol.psd)
    throw Error(ErrorCode::NotPositive, "smallest eigenvalue " + std::to_string(min_ev),
                min_ev);
  if (min_ev < 0.0) {
    ev = ev.cwiseMax(0.0);
    h = eig.eigenvectors() * ev.cast<Complex>().asDiagonal() * eig.eigenvectors().adjoint();
  }
  return DensityMatrix(std::move(h));
}

/// rho = 1/4 (I + a.sigma x I + I x b.sigma + sum T_ij sigma_i x sigma_j)
struct PauliRepresentation {
  Vector3 a = Vector3::Zero();
  Vector3 b = Vector3::Zero();
  Matrix3 T = Matrix3::Zero();
};

/// Pauli coordinates of an arbitrary (not necessarily validated) matrix.
inline PauliRepresentation pauli_coordinates(const Matrix4c& rho) {
  PauliRepresentation p;
  for (int i = 0; i < 3; ++i) {
    p.a(i) = (rho * pauli::kron(pauli::sigma(i), pauli::identity())).trace().real();
    p.b(i) = (rho * pauli::kron(pauli::identity(), pauli::sigma(i))).trace().real();
    for (int j = 0; j < 3; ++j)
      p.T(i, j) = (rho * pauli::kron(pauli::sigma(i), pauli::sigma(j))).trace().real();
  }
  return p;
}

inline PauliRepresentation to_pauli(const DensityMatrix& rho) {
  return pauli_coordinates(rho.matrix());
}

/// The matrix assembled from Pauli coordinates, without validation.
inline Matrix4c pauli_matrix(const PauliRepresentation& p) {
  Matrix4c m = Matrix4c::Identity();
  for (int i = 0; i < 3; ++i) {
    m += p.a(i) * pauli::kron(pauli::sigma(i), pauli::identity());
    m += p.b(i) * pauli::kron(pauli::identity(), pauli::sigma(i));
    for (int j = 0; j < 3; ++j) m += p.T(i, j) * pauli::kron(pauli::sigma(i), pauli::sigma(j));
  }
  return 0.25 * m;
}

inline DensityMatrix from_pauli(const PauliRepresentation& p, const Tolerances& tol = {}) {
  return validate_density(pauli_matrix(p), tol);
}

/// Exchanges the roles of Alice and Bob: (a, b, T) -> (b, a, T^T).
inline PauliRepresentation swap_parties(const PauliRepresentation& p) {
  return {p.b, p.a, p.T.transpose()};
}

/// The qubit-exchange permutation |ij> -> |ji>.
inline Matrix4c swap_operator() {
  Matrix4c s = Matrix4c::Zero();
  s(0, 0) = s(1, 2) = s(2, 1) = s(3, 3) = 1.0;
  return s;
}

inline DensityMatrix swap_parties(const DensityMatrix& rho, const Tolerances& tol = {}) {
  const Matrix4c s = swap_operator();
  return validate_density(s * rho.matrix() * s, tol);
}

// ---------------------------------------------------------------------------
// Canonical (diagonal-correlation) frame

struct CanonicalState {
  Vector3 a = Vector3::Zero();
  Vector3 b = Vector3::Zero();
  Vector3 c = Vector3::Zero();
  Matrix3 rot_a = Matrix3::Identity();
  Matrix3 rot_b = Matrix3::Identity();

  PauliRepresentation pauli() const { return {a, b, c.asDiagonal()}; }
};

/// Diagonalizes T by a pair of proper rotations, T = rot_a diag(c) rot_b^T,
/// with |c1| >= |c2| >= |c3| and any reflection sign carried by c3. An
/// already sorted diagonal T is returned unchanged with identity rotations.
inline CanonicalState canonicalize(const PauliRepresentation& p, const Tolerances& tol = {}) {
  CanonicalState out;
  const Vector3 d = p.T.diagonal();
  const double off = (p.T - Matrix3(d.asDiagonal())).cwiseAbs().maxCoeff();
  if (off <= tol.structure && std::abs(d(0)) >= std::abs(d(1)) &&
      std::abs(d(1)) >= std::abs(d(2))) {
    out.a = p.a;
    out.b = p.b;
    out.c = d;
    return out;
  }

  Eigen::JacobiSVD<Matrix3> svd(p.T, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3 u = svd.matrixU();
  Matrix3 v = svd.matrixV();
  Vector3 s = svd.singularValues();
  if (u.determinant() < 0) {
    u.col(2) *= -1.0;
    s(2) = -s(2);
  }
  if (v.determinant() < 0) {
    v.col(2) *= -1.0;
    s(2) = -s(2);
  }
  out.rot_a = u;
  out.rot_b = v;
  out.c = s;
  out.a = u.transpose() * p.a;
  out.b = v.transpose() * p.b;
  return out;
}

// ---------------------------------------------------------------------------
// X-states

/// rho_X = 1/4 (I + a3 sz x I + b3 I x sz + sum_i c_i s_i x s_i)
struct XStateParams {
  double a3 = 0, b3 = 0, c1 = 0, c2 = 0, c3 = 0;

  Vector3 c() const { return {c1, c2, c3}; }
  PauliRepresentation pauli() const {
    PauliRepresentation p;
    p.a = Vector3(0, 0, a3);
    p.b = Vector3(0, 0, b3);
    p.T = c().asDiagonal();
    return p;
  }
  /// Party exchange: a3 <-> b3, correlations unchanged.
  XStateParams swapped() const { return {b3, a3, c1, c2, c3}; }
  /// The parameters as seen by the steered party for `d` (identity for AtoB).
  XStateParams oriented(Direction d) const { return d == Direction::AtoB ? *this : swapped(); }
};

inline Matrix4c x_state_matrix(const XStateParams& x) {
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = (1 + x.a3 + x.b3 + x.c3) / 4;
  m(1, 1) = (1 + x.a3 - x.b3 - x.c3) / 4;
  m(2, 2) = (1 - x.a3 + x.b3 - x.c3) / 4;
  m(3, 3) = (1 - x.a3 - x.b3 + x.c3) / 4;
  m(0, 3) = m(3, 0) = (x.c1 - x.c2) / 4;
  m(1, 2) = m(2, 1) = (x.c1 + x.c2) / 4;
  return m;
}

namespace detail {

// a and b supported on a single common axis k and T diagonal: rotate k to z
// by a cyclic (proper) permutation of both frames.
inline std::optional<XStateParams> x_frame(const Vector3& a, const Vector3& b, const Matrix3& T,
                                           double eps) {
  const Vector3 d = T.diagonal();
  if ((T - Matrix3(d.asDiagonal())).cwiseAbs().maxCoeff() > eps) return std::nullopt;
  for (int k : {2, 0, 1}) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    if (std::abs(a(i)) <= eps && std::abs(a(j)) <= eps && std::abs(b(i)) <= eps &&
        std::abs(b(j)) <= eps)
      return XStateParams{a(k), b(k), d(i), d(j), d(k)};
  }
  return std::nullopt;
}

}  // namespace detail

/// Recognizes states that are local-unitarily an X-state with a, b along z:
/// first in the given frame, then in the canonical frame.
inline std::optional<XStateParams> as_x_state(const PauliRepresentation& p,
                                              const Tolerances& tol = {}) {
  const double eps = std::max(tol.structure, 1e-12);
  if (auto x = detail::x_frame(p.a, p.b, p.T, eps)) return x;
  const CanonicalState cs = canonicalize(p, tol);
  return detail::x_frame(cs.a, cs.b, Matrix3(cs.c.asDiagonal()), 1e-9);
}

// ---------------------------------------------------------------------------
// Named families

enum class Family {
  pure,
  bell_diagonal,
  x_state,
  rho_x0,
  w_eta_chi,
  w_v_theta,
  colour_noise,
  gen_isotropic,
};

inline constexpr std::array<std::pair<Family, std::string_view>, 8> kFamilyNames{{
    {Family::pure, "pure"},
    {Family::bell_diagonal, "bell_diagonal"},
    {Family::x_state, "x_state"},
    {Family::rho_x0, "rho_x0"},
    {Family::w_eta_chi, "w_eta_chi"},
    {Family::w_v_theta, "w_v_theta"},
    {Family::colour_noise, "colour_noise"},
    {Family::gen_isotropic, "gen_isotropic"},
}};

constexpr std::string_view to_string(Family f) {
  for (const auto& [fam, name] : kFamilyNames)
    if (fam == f) return name;
  return "unknown";
}

inline Family parse_family(std::string_view name) {
  for (const auto& [fam, n] : kFamilyNames)
    if (n == name) return fam;
  throw Error(ErrorCode::UnknownFamily, "no state family named '" + std::string(name) + "'");
}

using FamilyParams = std::map<std::string, double, std::less<>>;

namespace detail {

inline double param(const FamilyParams& params, std::string_view key,
                    std::optional<double> fallback = std::nullopt) {
  if (auto it = params.find(key); it != params.end()) return it->second;
  if (fallback) return *fallback;
  throw Error(ErrorCode::ParamOutOfDomain, "missing parameter '" + std::string(key) + "'");
}

inline void require(bool ok, std::string_view what, double value) {
  if (!ok)
    throw Error(ErrorCode::ParamOutOfDomain,
                std::string(what) + " (got " + std::to_string(value) + ")", value);
}

inline void check_known(const FamilyParams& params, std::initializer_list<std::string_view> keys,
                        Family f) {
  for (const auto& [k, v] : params) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw Error(ErrorCode::ParamOutOfDomain, "family " + std::string(to_string(f)) +
                                                   " has no parameter '" + k + "'");
  }
}

inline void check_unit(double v, std::string_view name) {
  require(v >= 0.0 && v <= 1.0, std::string(name) + " must lie in [0, 1]", v);
}

inline void check_theta(double theta) {
  require(theta >= 0.0 && theta <= std::numbers::pi / 2, "theta must lie in [0, pi/2]", theta);
}

inline Eigen::Vector4cd ket(double c00, double c01, double c10, double c11) {
  return Eigen::Vector4cd(c00, c01, c10, c11);
}

inline Matrix4c projector(const Eigen::Vector4cd& v) { return v * v.adjoint(); }

}  // namespace detail

/// Pauli (X-state) parameters of a family member, after domain checks.
inline XStateParams family_x_params(Family f, const FamilyParams& params) {
  using detail::param;
  using detail::require;
  switch (f) {
    case Family::pure: {
      detail::check_known(params, {"a"}, f);
      const double a = param(params, "a");
      require(std::abs(a) <= 1.0, "pure: |a| must be <= 1", a);
      const double c1 = 2 * a * std::sqrt(1 - a * a);
      return {2 * a * a - 1, 2 * a * a - 1, c1, -c1, 1.0};
    }
    case Family::bell_diagonal:
      detail::check_known(params, {"c1", "c2", "c3"}, f);
      return {0, 0, param(params, "c1"), param(params, "c2"), param(params, "c3")};
    case Family::x_state:
      detail::check_known(params, {"a3", "b3", "c1", "c2", "c3"}, f);
      return {param(params, "a3"), param(params, "b3"), param(params, "c1"),
              param(params, "c2"), param(params, "c3")};
    case Family::rho_x0: {
      detail::check_known(params, {"b3", "c3", "sign"}, f);
      const double b3 = param(params, "b3"), c3 = param(params, "c3");
      const double sign = param(params, "sign", 1.0);
      require(sign == 1.0 || sign == -1.0, "rho_x0: sign must be +1 or -1", sign);
      require(b3 >= -1.0 && b3 <= 1.0, "rho_x0: b3 must lie in [-1, 1]", b3);
      require(c3 >= b3 && c3 <= 1.0, "rho_x0: c3 must lie in [b3, 1]", c3);
      const double c1 = sign * std::sqrt((1 + b3) * (c3 - b3));
      return {1 - c3 + b3, b3, c1, -c1, c3};
    }
    case Family::w_eta_chi: {
      detail::check_known(params, {"eta", "chi"}, f);
      const double eta = param(params, "eta"), chi = param(params, "chi");
      detail::check_unit(eta, "eta");
      detail::check_unit(chi, "chi");
      const double c1 = -2 * eta * std::sqrt(chi * (1 - chi));
      return {1 - 2 * eta * (1 - chi), 2 * eta * chi - 1, c1, -c1, 2 * eta - 1};
    }
    case Family::w_v_theta: {
      detail::check_known(params, {"V", "theta"}, f);
      const double v = param(params, "V"), theta = param(params, "theta");
      detail::check_unit(v, "V");
      detail::check_theta(theta);
      const double c2t = std::cos(2 * theta), s2t = std::sin(2 * theta);
      return {(2 * v - 1) * c2t, c2t, s2t, (1 - 2 * v) * s2t, 2 * v - 1};
    }
    case Family::colour_noise:
    case Family::gen_isotropic: {
      detail::check_known(params, {"V", "theta"}, f);
      const double v = param(params, "V"), theta = param(params, "theta");
      detail::check_unit(v, "V");
      detail::check_theta(theta);
      const double c2t = std::cos(2 * theta), s2t = std::sin(2 * theta);
      const double c3 = f == Family::colour_noise ? 1.0 : v;
      return {v * c2t, v * c2t, v * s2t, -v * s2t, c3};
    }
  }
  throw Error(ErrorCode::UnknownFamily, "unhandled family");
}

/// The family's density matrix, built from its defining matrix or state
/// vectors and cross-checked against family_x_params.
inline DensityMatrix make_family(Family f, const FamilyParams& params, const Tolerances& tol = {}) {
  const XStateParams x = family_x_params(f, params);
  using detail::ket;
  using detail::param;
  using detail::projector;

  Matrix4c m;
  switch (f) {
    case Family::pure: {
      const double a = param(params, "a");
      m = projector(ket(a, 0, 0, std::sqrt(1 - a * a)));
      break;
    }
    case Family::bell_diagonal:
    case Family::x_state:
      m = x_state_matrix(x);
      break;
    case Family::rho_x0: {
      const double b3 = param(params, "b3"), c3 = param(params, "c3");
      const double sign = param(params, "sign", 1.0);
      const double off = sign * std::sqrt((1 + b3) * (c3 - b3)) / 2;
      m = Matrix4c::Zero();
      m(0, 0) = (1 + b3) / 2;
      m(1, 1) = (1 - c3) / 2;
      m(3, 3) = (c3 - b3) / 2;
      m(0, 3) = m(3, 0) = off;
      break;
    }
    case Family::w_eta_chi: {
      const double eta = param(params, "eta"), chi = param(params, "chi");
      const double off = -eta * std::sqrt(chi * (1 - chi));
      m = Matrix4c::Zero();
      m(0, 0) = eta * chi;
      m(1, 1) = 1 - eta;
      m(3, 3) = eta * (1 - chi);
      m(0, 3) = m(3, 0) = off;
      break;
    }
    case Family::w_v_theta: {
      const double v = param(params, "V"), theta = param(params, "theta");
      const double c = std::cos(theta), s = std::sin(theta);
      m = v * projector(ket(c, 0, 0, s)) + (1 - v) * projector(ket(0, s, c, 0));
      break;
    }
    case Family::colour_noise: {
      const double v = param(params, "V"), theta = param(params, "theta");
      Matrix4c noise = Matrix4c::Zero();
      noise(0, 0) = noise(3, 3) = 1.0;
      m = v * projector(ket(std::cos(theta), 0, 0, std::sin(theta))) + (1 - v) / 2 * noise;
      break;
    }
    case Family::gen_isotropic: {
      const double v = param(params, "V"), theta = param(params, "theta");
      m = v * projector(ket(std::cos(theta), 0, 0, std::sin(theta))) +
          (1 - v) / 4 * Matrix4c::Identity();
      break;
    }
  }

  DensityMatrix rho = validate_density(m, tol);
  const PauliRepresentation got = to_pauli(rho);
  const PauliRepresentation want = x.pauli();
  const double dev = std::max({(got.a - want.a).cwiseAbs().maxCoeff(),
                               (got.b - want.b).cwiseAbs().maxCoeff(),
                               (got.T - want.T).cwiseAbs().maxCoeff()});
  if (dev > 1e-10)
    throw std::logic_error("family " + std::string(to_string(f)) +
                           ": matrix and Pauli parameters disagree by " + std::to_string(dev));
  return rho;
}

inline DensityMatrix make_family(std::string_view name, const FamilyParams& params,
                                 const Tolerances& tol = {}) {
  return make_family(parse_family(name), params, tol);
}

}  // namespace steerkit
