#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace steerkit;
using steerkit::testing::random_density;

namespace {

Matrix4c bell_phi_plus() {
  Eigen::Vector4cd v(1, 0, 0, 1);
  v /= std::sqrt(2.0);
  return v * v.adjoint();
}

double max_abs(const Matrix4c& m) { return m.cwiseAbs().maxCoeff(); }

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no steerkit::Error thrown";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ValidateDensity, AcceptsMaximallyMixedAndBellProjector) {
  EXPECT_NO_THROW(validate_density(Matrix4c::Identity() / 4.0));
  EXPECT_NO_THROW(validate_density(bell_phi_plus()));
}

TEST(ValidateDensity, RejectsNegativeEigenvalueWithMagnitude) {
  Matrix4c m = Matrix4c::Zero();
  m.diagonal() << 0.5, 0.6, 0, -0.1;
  try {
    validate_density(m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotPositive);
    EXPECT_NEAR(e.magnitude(), -0.1, 1e-12);
  }
}

TEST(ValidateDensity, ChecksHermiticityBeforeTrace) {
  Matrix4c m = Matrix4c::Identity();  // trace 4
  m(0, 1) = 0.3;
  EXPECT_EQ(code_of([&] { validate_density(m); }), ErrorCode::NotHermitian);
  EXPECT_EQ(code_of([&] { validate_density(Matrix4c::Identity()); }), ErrorCode::TraceNotOne);
}

TEST(ValidateDensity, ClampsTinyNegativeEigenvalues) {
  Matrix4c m = bell_phi_plus();
  m(1, 1) = -5e-11;
  m(0, 0) += 5e-11;
  const DensityMatrix rho = validate_density(m);
  Eigen::SelfAdjointEigenSolver<Matrix4c> eig(rho.matrix());
  EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-15);
}

TEST(ValidateDensity, ToleranceIsConfigurable) {
  Matrix4c m = Matrix4c::Zero();
  m.diagonal() << 0.5, 0.5 + 1e-6, 0, -1e-6;
  EXPECT_THROW(validate_density(m), Error);
  Tolerances loose;
  loose.psd = 1e-5;
  EXPECT_NO_THROW(validate_density(m, loose));
}

TEST(ToPauli, MaximallyMixedHasNoCoordinates) {
  const auto p = to_pauli(validate_density(Matrix4c::Identity() / 4.0));
  EXPECT_LT(p.a.norm() + p.b.norm() + p.T.norm(), 1e-15);
}

TEST(ToPauli, BellProjectorCorrelations) {
  const auto p = to_pauli(validate_density(bell_phi_plus()));
  Matrix3 want = Vector3(1, -1, 1).asDiagonal();
  EXPECT_LT((p.T - want).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT(p.a.norm() + p.b.norm(), 1e-14);
}

TEST(ToPauli, WEtaChiCoordinatesFromTraces) {
  const double eta = 0.7, chi = 0.35;
  const DensityMatrix rho = make_family(Family::w_eta_chi, {{"eta", eta}, {"chi", chi}});
  // independent: explicit traces against sigma products
  auto tr = [&](const Matrix2c& l, const Matrix2c& r) {
    return (rho.matrix() * pauli::kron(l, r)).trace().real();
  };
  EXPECT_NEAR(tr(pauli::sigma(2), pauli::identity()), 1 - 2 * eta * (1 - chi), 1e-12);
  EXPECT_NEAR(tr(pauli::identity(), pauli::sigma(2)), 2 * eta * chi - 1, 1e-12);
  EXPECT_NEAR(tr(pauli::sigma(2), pauli::sigma(2)), 2 * eta - 1, 1e-12);
  const double c1 = -2 * eta * std::sqrt(chi * (1 - chi));
  EXPECT_NEAR(tr(pauli::sigma(0), pauli::sigma(0)), c1, 1e-12);
  EXPECT_NEAR(tr(pauli::sigma(1), pauli::sigma(1)), -c1, 1e-12);
  const auto p = to_pauli(rho);
  EXPECT_NEAR(p.T(0, 0), c1, 1e-12);
  EXPECT_NEAR(p.a(2), 1 - 2 * eta * (1 - chi), 1e-12);
}

TEST(FromPauli, ZeroAndBellDiagonal) {
  EXPECT_LT(max_abs(from_pauli({}).matrix() - Matrix4c::Identity() / 4.0), 1e-15);
  PauliRepresentation p;
  p.T = Vector3(0.3, -0.2, 0.1).asDiagonal();
  const Matrix4c m = from_pauli(p).matrix();
  // Bell-diagonal: support only on diagonal and anti-diagonal
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k)
      if (i != k && i + k != 3) {
        EXPECT_EQ(m(i, k), Complex(0, 0));
      }
  EXPECT_NEAR(m(0, 3).real(), (0.3 - (-0.2)) / 4, 1e-15);
}

TEST(FromPauli, RejectsUnphysical) {
  PauliRepresentation p;
  p.T = Vector3(1, 1, 1).asDiagonal();
  EXPECT_EQ(code_of([&] { from_pauli(p); }), ErrorCode::NotPositive);
}

TEST(FromPauli, RoundTripsRandomStates) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 100; ++i) {
    const DensityMatrix rho = validate_density(random_density(rng));
    const PauliRepresentation p = to_pauli(rho);
    EXPECT_LT(max_abs(from_pauli(p).matrix() - rho.matrix()), 1e-12);
    const PauliRepresentation q = to_pauli(from_pauli(p));
    EXPECT_LT((q.T - p.T).cwiseAbs().maxCoeff() + (q.a - p.a).norm() + (q.b - p.b).norm(), 1e-12);
    EXPECT_LE(p.a.norm(), 1 + 1e-12);
    EXPECT_LE(p.T.cwiseAbs().maxCoeff(), 1 + 1e-12);
  }
}

TEST(Canonicalize, SortedDiagonalGivesIdentityRotations) {
  PauliRepresentation p;
  p.T = Vector3(0.8, -0.5, 0.2).asDiagonal();
  p.a = Vector3(0, 0, 0.1);
  p.b = Vector3(0, 0, -0.1);
  const auto cs = canonicalize(p);
  EXPECT_EQ(cs.rot_a, Matrix3::Identity());
  EXPECT_EQ(cs.rot_b, Matrix3::Identity());
  EXPECT_EQ(cs.c, Vector3(0.8, -0.5, 0.2));
}

TEST(Canonicalize, ZeroCorrelationGivesZeroC) {
  const auto cs = canonicalize(PauliRepresentation{});
  EXPECT_EQ(cs.c, Vector3::Zero());
  EXPECT_EQ(cs.rot_a, Matrix3::Identity());
}

TEST(Canonicalize, RecoversCorrelationsAfterRandomRotations) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const Vector3 c(0.7, -0.4, 0.1);
    const Matrix3 ra = steerkit::testing::random_rotation(rng);
    const Matrix3 rb = steerkit::testing::random_rotation(rng);
    PauliRepresentation p;
    p.T = ra * c.asDiagonal() * rb.transpose();
    p.a = ra * Vector3(0.05, 0, 0.1);
    p.b = rb * Vector3(0, -0.1, 0.05);
    const auto cs = canonicalize(p);
    for (const Matrix3* r : {&cs.rot_a, &cs.rot_b}) {
      EXPECT_LT((*r * r->transpose() - Matrix3::Identity()).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_NEAR(r->determinant(), 1.0, 1e-10);
    }
    const Matrix3 d = cs.rot_a.transpose() * p.T * cs.rot_b;
    EXPECT_LT((d - Matrix3(cs.c.asDiagonal())).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(std::abs(cs.c(0)), 0.7, 1e-10);
    EXPECT_NEAR(std::abs(cs.c(1)), 0.4, 1e-10);
    EXPECT_NEAR(std::abs(cs.c(2)), 0.1, 1e-10);
    // sign of the product is a local-unitary invariant: det T
    EXPECT_NEAR(cs.c.prod(), c.prod(), 1e-10);
    EXPECT_LT((cs.a - cs.rot_a.transpose() * p.a).norm(), 1e-12);
  }
}

TEST(Canonicalize, PreservesSpectrum) {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 30; ++i) {
    const DensityMatrix rho = validate_density(random_density(rng));
    const auto cs = canonicalize(to_pauli(rho));
    const Matrix4c back = pauli_matrix(cs.pauli());
    Eigen::SelfAdjointEigenSolver<Matrix4c> e1(rho.matrix()), e2(back);
    EXPECT_LT((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SwapParties, SymmetricStateIsFixed) {
  PauliRepresentation p;
  p.a = p.b = Vector3(0.1, 0.2, 0.3);
  p.T << 0.3, 0.1, 0, 0.1, -0.2, 0.05, 0, 0.05, 0.1;
  const auto q = swap_parties(p);
  EXPECT_EQ(q.a, p.a);
  EXPECT_EQ(q.T, p.T);
}

TEST(SwapParties, WEtaChiExchangesMarginals) {
  const XStateParams x = family_x_params(Family::w_eta_chi, {{"eta", 0.6}, {"chi", 0.2}});
  const auto q = swap_parties(x.pauli());
  EXPECT_DOUBLE_EQ(q.a(2), x.b3);
  EXPECT_DOUBLE_EQ(q.b(2), x.a3);
  EXPECT_EQ(q.T, x.pauli().T);
}

TEST(SwapParties, InvolutionAndSwapOperator) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 50; ++i) {
    const DensityMatrix rho = validate_density(random_density(rng));
    const auto p = to_pauli(rho);
    const auto pp = swap_parties(swap_parties(p));
    EXPECT_EQ(pp.T, p.T);
    EXPECT_EQ(pp.a, p.a);
    const Matrix4c s = swap_operator();
    const auto via_matrix = pauli_coordinates(s * rho.matrix() * s);
    const auto via_rule = swap_parties(p);
    EXPECT_LT((via_matrix.T - via_rule.T).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((via_matrix.a - via_rule.a).norm() + (via_matrix.b - via_rule.b).norm(), 1e-14);
  }
}

TEST(MakeFamily, WVThetaPureLimit) {
  const double theta = std::numbers::pi / 6;
  const DensityMatrix rho = make_family("w_v_theta", {{"V", 1.0}, {"theta", theta}});
  Eigen::Vector4cd psi(std::cos(theta), 0, 0, std::sin(theta));
  EXPECT_LT(max_abs(rho.matrix() - psi * psi.adjoint()), 1e-14);
}

TEST(MakeFamily, RhoX0MatrixEntries) {
  const DensityMatrix rho = make_family("rho_x0", {{"b3", -0.5}, {"c3", 0.2}, {"sign", 1}});
  EXPECT_NEAR(rho(0, 0).real(), 0.25, 1e-15);
  EXPECT_NEAR(rho(1, 1).real(), 0.4, 1e-15);
  EXPECT_NEAR(rho(3, 3).real(), 0.35, 1e-15);
  EXPECT_NEAR(rho(0, 3).real(), 0.2958, 1e-4);
  EXPECT_NEAR(rho(0, 3).real(), std::sqrt(0.5 * 0.7) / 2, 1e-15);
  EXPECT_NEAR(rho(2, 2).real(), 0.0, 1e-15);
  const DensityMatrix neg = make_family("rho_x0", {{"b3", -0.5}, {"c3", 0.2}, {"sign", -1}});
  EXPECT_NEAR(neg(0, 3).real(), -rho(0, 3).real(), 1e-15);
}

TEST(MakeFamily, ColourNoiseAtZeroVisibility) {
  const DensityMatrix rho = make_family("colour_noise", {{"V", 0.0}, {"theta", 0.4}});
  Matrix4c want = Matrix4c::Zero();
  want(0, 0) = want(3, 3) = 0.5;
  EXPECT_LT(max_abs(rho.matrix() - want), 1e-15);
}

TEST(MakeFamily, AllFamiliesMatchTheirXParameters) {
  const std::vector<std::pair<Family, FamilyParams>> cases = {
      {Family::pure, {{"a", 0.6}}},
      {Family::bell_diagonal, {{"c1", 0.3}, {"c2", -0.4}, {"c3", 0.2}}},
      {Family::x_state, {{"a3", 0.1}, {"b3", 0.2}, {"c1", 0.3}, {"c2", -0.1}, {"c3", 0.2}}},
      {Family::rho_x0, {{"b3", -0.3}, {"c3", 0.4}}},
      {Family::w_eta_chi, {{"eta", 0.5}, {"chi", 0.5}}},
      {Family::w_v_theta, {{"V", 0.3}, {"theta", 0.7}}},
      {Family::colour_noise, {{"V", 0.3}, {"theta", 0.7}}},
      {Family::gen_isotropic, {{"V", 0.3}, {"theta", 0.7}}},
  };
  for (const auto& [f, params] : cases) {
    const DensityMatrix rho = make_family(f, params);
    const XStateParams x = family_x_params(f, params);
    EXPECT_LT(max_abs(rho.matrix() - x_state_matrix(x)), 1e-12) << to_string(f);
    const auto recognized = as_x_state(to_pauli(rho));
    ASSERT_TRUE(recognized.has_value()) << to_string(f);
  }
}

TEST(MakeFamily, Errors) {
  EXPECT_EQ(code_of([] { make_family("nonsense", {}); }), ErrorCode::UnknownFamily);
  EXPECT_EQ(code_of([] { make_family("w_v_theta", {{"V", 1.2}, {"theta", 0.1}}); }),
            ErrorCode::ParamOutOfDomain);
  EXPECT_EQ(code_of([] { make_family("w_v_theta", {{"V", 0.2}}); }), ErrorCode::ParamOutOfDomain);
  EXPECT_EQ(code_of([] { make_family("w_v_theta", {{"V", 0.2}, {"theta", 0.1}, {"x", 1}}); }),
            ErrorCode::ParamOutOfDomain);
  EXPECT_EQ(code_of([] { make_family("rho_x0", {{"b3", 0.5}, {"c3", 0.2}}); }),
            ErrorCode::ParamOutOfDomain);
  EXPECT_EQ(code_of([] { make_family("rho_x0", {{"b3", -0.5}, {"c3", 0.2}, {"sign", 0.5}}); }),
            ErrorCode::ParamOutOfDomain);
  EXPECT_EQ(code_of([] { make_family("bell_diagonal", {{"c1", 1}, {"c2", 1}, {"c3", 1}}); }),
            ErrorCode::NotPositive);
}

TEST(AsXState, RecognizesRotatedXStates) {
  std::mt19937_64 rng(8);
  const XStateParams x{0.2, -0.3, 0.4, -0.25, 0.3};
  const Matrix4c rho = x_state_matrix(x);
  for (int i = 0; i < 10; ++i) {
    // rotations about z keep a and b on the z axis
    const double phi = 0.3 * i;
    Matrix2c rz = Matrix2c::Zero();
    rz(0, 0) = std::polar(1.0, -phi / 2);
    rz(1, 1) = std::polar(1.0, phi / 2);
    const Matrix4c rotated = steerkit::testing::local_unitary(rho, rz, rz.adjoint());
    const auto got = as_x_state(to_pauli(validate_density(rotated)));
    ASSERT_TRUE(got.has_value());
    EXPECT_NEAR(got->a3, x.a3, 1e-9);
    EXPECT_NEAR(got->b3, x.b3, 1e-9);
    EXPECT_NEAR(std::abs(got->c1 * got->c2), std::abs(x.c1 * x.c2), 1e-9);
  }
  (void)rng;
}

TEST(AsXState, RejectsGenericStates) {
  std::mt19937_64 rng(9);
  const DensityMatrix rho = validate_density(random_density(rng));
  EXPECT_FALSE(as_x_state(to_pauli(rho)).has_value());
}
